#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdo/model.hpp"
#include "tdo/trust.hpp"

namespace tdo {

const std::vector<std::string>& builtin_transformation_kinds();

// Fresh derivation statement for untransformed source bytes: both endpoints
// are the source digest and the step list is empty (the identity derivation).
DerivationStatement make_statement(std::span<const std::uint8_t> source_bytes);

// Append one transformation. The input bytes must digest to the statement's
// current result; anything else throws a chain-break error.
DerivationStatement record_transformation(DerivationStatement statement, std::string kind,
                                          std::span<const std::uint8_t> input_bytes,
                                          std::span<const std::uint8_t> output_bytes,
                                          std::string agent, std::string event, Date timestamp);

// True iff the endpoints match the given bytes and the internal chain is
// unbroken (contiguous 1-based indices, adjacent digests, endpoint equality).
bool verify_derivation(const DerivationStatement& statement,
                       std::span<const std::uint8_t> source_bytes,
                       std::span<const std::uint8_t> result_bytes) noexcept;

enum class DeriveMode { nest, link };

// Build the successor version of a sealed object. The predecessor's seal must
// verify against `trust`; the new object records a predecessor reference with
// the predecessor's sealed-bytes digest, copies its work id, and embeds the
// statement's steps as its transformation history. nest mode additionally
// embeds the predecessor's sealed bytes as a payload blob named
// "predecessor-<version id>". Returns an unsealed object.
TrustworthyDigitalObject derive_version(std::span<const std::uint8_t> predecessor_sealed_bytes,
                                        std::vector<ContentBlob> new_payload, DeriveMode mode,
                                        const DerivationStatement& statement,
                                        ProvenanceStatement provenance_statement,
                                        std::vector<MetadataRecord> metadata,
                                        const TrustStore& trust);

// ---------------------------------------------------------------------------
// Genre policy
// ---------------------------------------------------------------------------

// The caller's faithfulness convention for one genre: which transformation
// kinds preserve enough, and which metadata keys must be present.
struct GenrePolicy {
    std::string genre;
    std::vector<std::string> allowed_kinds;      // sorted, unique, non-empty
    std::vector<std::string> required_metadata;  // sorted, unique

    bool operator==(const GenrePolicy&) const = default;
};

GenrePolicy make_policy(std::string genre, std::vector<std::string> allowed_kinds,
                        std::vector<std::string> required_metadata);

std::vector<std::uint8_t> policy_bytes(const GenrePolicy& policy);
GenrePolicy decode_policy(std::span<const std::uint8_t> bytes);
GenrePolicy load_policy(const std::string& path);
void save_policy(const std::string& path, const GenrePolicy& policy);

// ---------------------------------------------------------------------------
// Authenticity judgment
// ---------------------------------------------------------------------------

// Maps a version id (lowercase hex) to the stored bytes for it, or nullopt
// when unknown. Implementations return bytes as stored, unverified; callers
// check digests.
using ReferentResolver =
    std::function<std::optional<std::vector<std::uint8_t>>(const std::string&)>;

struct AuthenticityVerdict {
    bool derivative_ok = false;
    bool provenance_ok = false;
    bool faithful_ok = false;
    bool authentic = false;
    std::vector<std::string> reasons;
};

// The full calculus over sealed bytes: derivative_ok (predecessor references
// resolve and digest-match, embedded history internally consistent),
// provenance_ok (statement present and the seal verifies), faithful_ok (all
// transformation kinds allowed by policy, required metadata present).
// authentic is the conjunction. Never throws.
AuthenticityVerdict judge_authenticity(std::span<const std::uint8_t> sealed_bytes,
                                       const GenrePolicy& policy, const TrustStore& trust,
                                       const ReferentResolver& resolve);

// ---------------------------------------------------------------------------
// History
// ---------------------------------------------------------------------------

struct HistoryHop {
    VersionId id;
    bool verified = false;

    bool operator==(const HistoryHop&) const = default;
};

// Walks predecessor references from the given object back to the first
// version, newest first. Each hop fetches the referenced bytes through the
// resolver and checks them against the reference's expected digest; a
// mismatch marks the hop unverified, and the walk continues through the
// stored bytes when they still decode. Throws on a predecessor cycle.
std::vector<HistoryHop> trace_history(const TrustworthyDigitalObject& tdo,
                                      const ReferentResolver& resolve);

} // namespace tdo
