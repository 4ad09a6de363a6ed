#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdo {

inline constexpr std::string_view kDefaultDigestAlgorithm = "sha256";

// A digest value tagged with the algorithm that produced it, so archived
// objects can outlive any single algorithm.
struct Digest {
    std::string algorithm_tag;
    std::vector<std::uint8_t> bytes;

    bool operator==(const Digest&) const = default;

    std::string hex() const;
};

// Declared output length of a registered digest algorithm; nullopt for an
// unknown tag.
std::optional<std::size_t> digest_length(std::string_view algorithm_tag);

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

} // namespace tdo
