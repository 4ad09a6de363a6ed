#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdo {

// Lowercase hex. Decoding is strict: even length, lowercase digits only.
std::string hex_encode(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view text);

// RFC 4648 base64, standard alphabet, padding required, no line breaks.
// Decoding is strict canonical: rejects whitespace, invalid characters,
// bad padding, and non-zero trailing bits in the final quantum, so every
// byte sequence has exactly one accepted encoding.
std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

bool utf8_valid(std::string_view text);

// Character classes the canonical form allows. Attribute values carry no
// control characters; text content additionally allows tab and newline.
bool attr_value_safe(std::string_view text);
bool text_content_safe(std::string_view text);

} // namespace tdo
