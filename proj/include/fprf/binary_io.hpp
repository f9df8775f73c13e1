#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "fprf/error.hpp"

namespace fprf {

// Little-endian scalar helpers shared by the tensor and container formats.

inline void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, uint64_t v) {
  put_u32(out, static_cast<uint32_t>(v));
  put_u32(out, static_cast<uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }

inline uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  require(in.gcount() == 4, ErrorKind::Data, "unexpected end of file");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

inline uint64_t get_u64(std::istream& in) {
  const uint64_t lo = get_u32(in);
  const uint64_t hi = get_u32(in);
  return lo | hi << 32;
}

inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

inline void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const uint32_t n = get_u32(in);
  require(n < (1u << 28), ErrorKind::Data, "string length out of range");
  std::string s(n, '\0');
  in.read(s.data(), n);
  require(static_cast<uint32_t>(in.gcount()) == n, ErrorKind::Data, "unexpected end of file");
  return s;
}

}  // namespace fprf
