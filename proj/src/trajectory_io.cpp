#include "lerw/trajectory_io.hpp"

#include <json.hpp>
#include <stdexcept>
#include <string>

namespace lerw {

std::uint64_t zigzag(std::int64_t x) {
  return (static_cast<std::uint64_t>(x) << 1) ^ static_cast<std::uint64_t>(x >> 63);
}

std::int64_t unzigzag(std::uint64_t z) {
  return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
}

void write_jsonl(std::ostream& os, const Trajectory& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << "{\"n\":" << i << ",\"u\":" << t[i].u << ",\"v\":" << t[i].v << "}\n";
  }
}

std::vector<Trajectory> read_jsonl(std::istream& is) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto n = j.at("n").get<std::uint64_t>();
    const LatticePoint p{j.at("u").get<std::int64_t>(), j.at("v").get<std::int64_t>()};
    if (n == 0) out.emplace_back();
    if (out.empty() || n != out.back().size()) {
      throw std::runtime_error("jsonl line " + std::to_string(lineno) + ": step index out of sequence");
    }
    out.back().push_back(p);
  }
  return out;
}

namespace {

void put_varint(std::ostream& os, std::uint64_t x) {
  while (x >= 0x80) {
    os.put(static_cast<char>((x & 0x7F) | 0x80));
    x >>= 7;
  }
  os.put(static_cast<char>(x));
}

bool get_varint(std::istream& is, std::uint64_t& x) {
  x = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) {
      if (shift == 0) return false;
      throw std::runtime_error("truncated varint");
    }
    x |= static_cast<std::uint64_t>(c & 0x7F) << shift;
    if ((c & 0x80) == 0) return true;
  }
  throw std::runtime_error("varint longer than 64 bits");
}

}  // namespace

void write_binary_header(std::ostream& os) {
  os.write("LERW", 4);
  os.put(static_cast<char>(kBinaryVersion & 0xFF));
  os.put(static_cast<char>(kBinaryVersion >> 8));
}

void write_binary_record(std::ostream& os, const Trajectory& t) {
  put_varint(os, t.size());
  LatticePoint prev{0, 0};
  for (const LatticePoint& p : t) {
    put_varint(os, zigzag(p.u - prev.u));
    put_varint(os, zigzag(p.v - prev.v));
    prev = p;
  }
}

std::vector<Trajectory> read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "LERW") throw std::runtime_error("bad magic");
  const int lo = is.get();
  const int hi = is.get();
  if (lo < 0 || hi < 0) throw std::runtime_error("truncated header");
  const auto version = static_cast<std::uint16_t>(lo | (hi << 8));
  if (version != kBinaryVersion) throw std::runtime_error("unsupported version " + std::to_string(version));
  std::vector<Trajectory> out;
  std::uint64_t count = 0;
  while (get_varint(is, count)) {
    Trajectory t;
    t.reserve(count);
    LatticePoint prev{0, 0};
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint64_t du = 0, dv = 0;
      if (!get_varint(is, du) || !get_varint(is, dv)) throw std::runtime_error("truncated record");
      prev = prev + LatticePoint{unzigzag(du), unzigzag(dv)};
      t.push_back(prev);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace lerw
