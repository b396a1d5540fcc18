#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dseg {

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// 16 lowercase hex digits of fnv1a64(bytes).
std::string hex_digest(std::string_view bytes);

}  // namespace dseg
