#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace dimabsa {

std::array<std::uint8_t, 32> sha256(std::string_view data);

std::string sha256_hex(std::string_view data);

// First 8 digest bytes as a big-endian integer. Uniform enough for
// seeded template picking and bucketed sharding.
std::uint64_t hash64(std::string_view data);

} // namespace dimabsa
