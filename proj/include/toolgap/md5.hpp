#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace toolgap {

// RFC 1321 MD5. Used for the feature-hashing trick and run fingerprints; not
// a security boundary.
std::array<std::uint8_t, 16> md5_digest(std::string_view data);

std::string md5_hex(std::string_view data);

// Low 64 bits of the 128-bit digest (bytes 8..15), read big-endian.
std::uint64_t md5_low64(std::string_view data);

}  // namespace toolgap
