#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tdo/digest.hpp"
#include "tdo/markup.hpp"
#include "tdo/model.hpp"

namespace tdo {

// The single byte form of an object under the TDO/1 canonical grammar
// (docs/format-tdo1). Signing and digesting are defined over these bytes.
struct CanonicalDocument {
    std::vector<std::uint8_t> bytes;

    bool operator==(const CanonicalDocument&) const = default;
};

// Canonical encoding. Refuses structurally invalid objects (see
// validate_structure); output is byte-identical for logically equal inputs.
CanonicalDocument encode(const TrustworthyDigitalObject& tdo);

// Strict canonical-only decoding. Malformed markup throws ParseError with a
// byte offset; well-formed bytes that are not the canonical encoding of an
// object throw CanonicalityError. Structural invariants are NOT enforced
// here; decode can return an object that validate_structure then reports on.
TrustworthyDigitalObject decode(std::span<const std::uint8_t> bytes);

// Digest of the exact bytes under the default algorithm.
Digest canonical_digest(std::span<const std::uint8_t> bytes);

// Building blocks shared by the identifier, sealing, and trust machinery.
// These skip structural validation; the public encode() is the checked entry.
std::vector<std::uint8_t> payload_block_bytes(const std::vector<ContentBlob>& payload);
std::vector<std::uint8_t> encode_unchecked(const TrustworthyDigitalObject& tdo);

// Canonical bytes the seal signature covers: the full document with the
// seal present but its signature value emptied, so the chain and seal date
// are signature-protected along with payload and protection block.
std::vector<std::uint8_t> seal_signing_bytes(const TrustworthyDigitalObject& tdo);

// Certificates as standalone canonical documents. The signing form omits the
// signature element; the full form is also the preimage of the certificate's
// identifying digest.
std::vector<std::uint8_t> certificate_bytes(const Certificate& cert);
std::vector<std::uint8_t> certificate_signing_bytes(const Certificate& cert);
Certificate decode_certificate(std::span<const std::uint8_t> bytes);

Node certificate_node(const Certificate& cert, bool with_signature);
Certificate certificate_from_node(const Node& node);

// Strict mapping helpers shared by the other canonical file formats (trust
// stores, genre policies): parse + map + re-emit must reproduce the input.
void require_reencode_match(std::span<const std::uint8_t> original, const Node& mapped);

inline std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::vector<std::uint8_t> to_byte_vector(const std::string& s) {
    return {s.begin(), s.end()};
}

} // namespace tdo
