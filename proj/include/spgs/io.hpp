#pragma once

// Field dumps and number formatting.
//
// Dump layout: one ASCII line "SPGS1 n=<n> L=<decimal> staggered=<0|1>\n"
// followed by n^3 little-endian IEEE-754 binary64 values, x-fastest.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "spgs/error.hpp"
#include "spgs/grid.hpp"

namespace spgs {

/// Shortest decimal that round-trips to the same double.
inline std::string format_decimal(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_decimal(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw Error(ErrorCode::invalid_argument, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace detail {

inline void put_le64(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) {
    bytes[b] = static_cast<unsigned char>(bits & 0xffu);
    bits >>= 8;
  }
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

inline double get_le64(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
    throw Error(ErrorCode::io, "field dump truncated");
  }
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline std::string dump_header(const GridSpec& g) {
  return "SPGS1 n=" + std::to_string(g.points()) + " L=" + format_decimal(g.half_width()) +
         " staggered=" + (g.staggered() ? "1" : "0") + "\n";
}

inline void write_field(std::ostream& os, const ScalarField& f) {
  const std::string header = dump_header(f.grid());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (double v : f.values()) detail::put_le64(os, v);
  if (!os) throw Error(ErrorCode::io, "failed writing field dump");
}

inline ScalarField read_field(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error(ErrorCode::io, "field dump is empty");
  std::istringstream hs(header);
  std::string magic, n_tok, l_tok, s_tok;
  hs >> magic >> n_tok >> l_tok >> s_tok;
  if (magic != "SPGS1" || n_tok.rfind("n=", 0) != 0 || l_tok.rfind("L=", 0) != 0 ||
      s_tok.rfind("staggered=", 0) != 0) {
    throw Error(ErrorCode::io, "bad field dump header: " + header);
  }
  std::size_t n = 0;
  double half_width = 0.0;
  bool staggered = false;
  try {
    n = static_cast<std::size_t>(std::stoul(n_tok.substr(2)));
    half_width = parse_decimal(l_tok.substr(2));
    const std::string s = s_tok.substr(10);
    if (s != "0" && s != "1") throw Error(ErrorCode::io, "staggered flag must be 0 or 1");
    staggered = s == "1";
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::io, "bad field dump header: " + header);
  } catch (const Error&) {
    throw Error(ErrorCode::io, "bad field dump header: " + header);
  }
  const GridSpec grid(half_width, n, staggered);
  std::vector<double> values(grid.size());
  for (double& v : values) v = detail::get_le64(is);
  return ScalarField(grid, std::move(values));
}

inline void save_field(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  write_field(os, f);
}

inline ScalarField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::io, "cannot open " + path);
  return read_field(is);
}

}  // namespace spgs
