#pragma once

#include <cstdint>
#include <string_view>

namespace ccl {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seeded 64-bit FNV-1a over the bytes of `data`, passed through mix64.
// The basis is xor-ed with mix64(seed) so that distinct seeds give unrelated
// streams. Byte-oriented, so the result does not depend on host endianness.
std::uint64_t hash64(std::string_view data, std::uint64_t seed = 0) noexcept;

}  // namespace ccl
