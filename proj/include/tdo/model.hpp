#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdo/date.hpp"
#include "tdo/digest.hpp"

namespace tdo {

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

// Content-derived version identifier: lowercase hex of the digest of the
// canonical payload block. Self-certifying: recomputing the payload digest
// must reproduce it.
struct VersionId {
    std::string value;

    bool operator==(const VersionId&) const = default;
    auto operator<=>(const VersionId&) const = default;
};

// Work identifier: the VersionId of the first version of the work, copied
// forward through every derived version.
struct WorkId {
    std::string value;

    bool operator==(const WorkId&) const = default;
    auto operator<=>(const WorkId&) const = default;
};

// ---------------------------------------------------------------------------
// Payload
// ---------------------------------------------------------------------------

enum class BlobEncoding { raw, vm_program, vm_encoded };

std::string_view to_string(BlobEncoding e);
std::optional<BlobEncoding> blob_encoding_from(std::string_view s);

struct ContentBlob {
    std::string name;
    std::string media_hint;
    BlobEncoding encoding = BlobEncoding::raw;
    std::vector<std::uint8_t> bytes;
    // Digest of the decoder program blob; required when encoding=vm_encoded.
    std::optional<Digest> decoder_ref;

    bool operator==(const ContentBlob&) const = default;
};

// ---------------------------------------------------------------------------
// References and metadata
// ---------------------------------------------------------------------------

enum class RefKind { version, work };

std::string_view to_string(RefKind k);
std::optional<RefKind> ref_kind_from(std::string_view s);

// A link to another object. The referent's digest travels with the reference;
// a reference without it is invalid (dissociation would be undetectable).
struct ExternalReference {
    RefKind target_kind = RefKind::version;
    std::string target; // hex identifier
    std::optional<Digest> expected_digest; // of the referent's sealed bytes
    std::string relation;

    bool operator==(const ExternalReference&) const = default;
};

struct MetadataRecord {
    std::string key;
    std::string value;
    std::string scheme; // empty only for built-in keys

    bool operator==(const MetadataRecord&) const = default;
    auto operator<=>(const MetadataRecord&) const = default;
};

// Canonical metadata order: (scheme, key, value).
bool metadata_canonical_less(const MetadataRecord& a, const MetadataRecord& b);

const std::vector<std::string>& builtin_metadata_keys();

// ---------------------------------------------------------------------------
// Provenance
// ---------------------------------------------------------------------------

// One recorded transformation step: who applied what to which bytes.
struct TransformationRecord {
    std::uint64_t index = 0; // 1-based position within one derivation
    std::string kind;
    Digest input_digest;
    Digest output_digest;
    std::string agent;
    std::string event;
    Date timestamp;

    bool operator==(const TransformationRecord&) const = default;
};

// The claim that result bytes were produced from source bytes by the listed
// transformations, applied in order.
struct DerivationStatement {
    Digest source_digest;
    Digest result_digest;
    std::vector<TransformationRecord> steps;

    bool operator==(const DerivationStatement&) const = default;
};

// The claim that `creator` made `created` as part of `event`.
struct ProvenanceStatement {
    std::string creator;
    std::string created; // hex digest or version id
    std::string event;

    bool operator==(const ProvenanceStatement&) const = default;
};

// ---------------------------------------------------------------------------
// Certificates and seals (data only; operations live in trust.hpp)
// ---------------------------------------------------------------------------

enum class CertRole { root, witness, editor };

std::string_view to_string(CertRole r);
std::optional<CertRole> cert_role_from(std::string_view s);

struct PublicKey {
    std::string algorithm_tag;
    std::vector<std::uint8_t> bytes;

    bool operator==(const PublicKey&) const = default;
};

struct SignatureValue {
    std::string algorithm_tag;
    std::vector<std::uint8_t> bytes;

    bool operator==(const SignatureValue&) const = default;
};

// Public-key attestation node. Root certificates are self-attested
// (issuer_digest absent); every other role carries the digest of its issuing
// certificate, recursing toward a root.
struct Certificate {
    PublicKey subject_public_key;
    std::string subject_name;
    CertRole role = CertRole::editor;
    std::optional<Digest> issuer_digest;
    Date valid_from;
    Date valid_to;
    SignatureValue signature;

    bool operator==(const Certificate&) const = default;
};

// An institution's published key for one calendar year.
struct KeyEpoch {
    std::string institution;
    int year = 0;
    PublicKey public_key;

    bool operator==(const KeyEpoch&) const = default;
};

// Signature over the canonical object bytes (signature field empty), plus the
// whole certificate chain, leaf first, so verification needs no network.
struct Seal {
    std::vector<Certificate> chain; // chain[0] is the signer certificate
    Date seal_date;
    SignatureValue signature;

    bool operator==(const Seal&) const = default;

    const Certificate& signer_certificate() const { return chain.front(); }
};

// ---------------------------------------------------------------------------
// The object
// ---------------------------------------------------------------------------

struct ProtectionBlock {
    VersionId version_id;
    WorkId work_id;
    std::vector<TransformationRecord> provenance;
    ProvenanceStatement provenance_statement;
    std::vector<ExternalReference> predecessors;
    std::vector<ExternalReference> links;
    std::vector<MetadataRecord> metadata;
    std::optional<Digest> vm_spec_ref;

    bool operator==(const ProtectionBlock&) const = default;
};

struct TrustworthyDigitalObject {
    std::vector<ContentBlob> payload;
    ProtectionBlock protection;
    std::optional<Seal> seal;

    bool operator==(const TrustworthyDigitalObject&) const = default;
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

// Digest of the canonical payload block, as lowercase hex. Pure function of
// payload content. Throws StructuralError for an empty payload or duplicate
// blob names.
VersionId derive_version_id(const std::vector<ContentBlob>& payload);

// Build an unsealed first-version object: version_id derived from the
// payload, work_id equal to it, empty provenance, metadata normalized to
// canonical order. A provenance statement with empty `created` is completed
// with the new version id. vm_spec_ref is filled in whenever any blob has a
// non-raw encoding.
TrustworthyDigitalObject new_tdo(std::vector<ContentBlob> payload,
                                 std::vector<MetadataRecord> metadata,
                                 ProvenanceStatement provenance_statement);

struct Violation {
    std::string field;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

// Checks every type invariant and reports violations; never throws. An empty
// result means the object is structurally sound (it says nothing about
// signatures or trust).
std::vector<Violation> validate_structure(const TrustworthyDigitalObject& tdo);

} // namespace tdo
