#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tdo::testing {

// Reference SHA-256 written directly from FIPS 180-4, independent of the
// library's OpenSSL-backed implementation. Exists to cross-check digests.
std::vector<std::uint8_t> ref_sha256(std::span<const std::uint8_t> data);
std::string ref_sha256_hex(std::span<const std::uint8_t> data);
std::string ref_sha256_hex(std::string_view data);

} // namespace tdo::testing
