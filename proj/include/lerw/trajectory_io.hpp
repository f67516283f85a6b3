#pragma once

// Trajectory encodings.
//
// JSON lines: one object {"n": i, "u": u, "v": v} per vertex; a record with
// n = 0 starts a new trajectory.
//
// Binary: "LERW", version as little-endian u16, then per trajectory a varint
// vertex count followed by zig-zag varint (du, dv) deltas, the first taken
// from (0, 0).

#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "lerw/gasket.hpp"

namespace lerw {

using Trajectory = std::vector<LatticePoint>;

constexpr std::uint16_t kBinaryVersion = 1;

void write_jsonl(std::ostream& os, const Trajectory& t);
std::vector<Trajectory> read_jsonl(std::istream& is);

void write_binary_header(std::ostream& os);
void write_binary_record(std::ostream& os, const Trajectory& t);
// Throws std::runtime_error on a bad magic, unknown version or truncated data.
std::vector<Trajectory> read_binary(std::istream& is);

std::uint64_t zigzag(std::int64_t x);
std::int64_t unzigzag(std::uint64_t z);

}  // namespace lerw
