#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdo/model.hpp"

namespace tdo {

inline constexpr int kDefaultAuditThreshold = 2;

// True for a well-formed object identifier (lowercase hex of digest length).
bool is_object_id(std::string_view id);

struct ObjectCheck {
    VersionId id;
    bool found = false;
    bool verified = false;

    bool operator==(const ObjectCheck&) const = default;
};

struct AuditReport {
    VersionId version_id;
    int replicas_found = 0;
    int replicas_verified = 0;
    int threshold = kDefaultAuditThreshold;
    bool at_risk = true;
};

enum class LinkOutcome { resolved_match, resolved_mismatch, unresolved };

std::string_view to_string(LinkOutcome o);

struct LinkCheck {
    ExternalReference ref;
    bool from_predecessors = false; // else from links
    LinkOutcome outcome = LinkOutcome::unresolved;
};

struct LinkScanReport {
    VersionId version_id;
    std::vector<LinkCheck> checks;
};

// Content-addressed store of sealed objects under one filesystem root:
// objects/<2 hex>/<id>.tdo holds the canonical bytes, index/<2 hex>/<id>.idx
// a canonical document recording the stored digest and the work id. All
// writes go through a temp file and an atomic rename.
class RepositoryStore {
public:
    // Opens the store, creating the directory skeleton when absent.
    static RepositoryStore open(std::string root_path);

    const std::string& root() const { return root_; }

    // Full validation at the door: canonical decode, structural validity, a
    // seal present, and the embedded version id matching the payload digest
    // (else a forged-identifier error). Idempotent for identical bytes;
    // refuses different bytes under an existing id. Trust grounding is not
    // checked here; custody and judgment are separate.
    VersionId ingest(std::span<const std::uint8_t> sealed_bytes);

    // Stored bytes, re-verified against the indexed digest on every read.
    // Throws StoreError for unknown ids and for detected corruption.
    std::vector<std::uint8_t> retrieve(const std::string& id) const;

    // Bytes exactly as stored, unverified; nullopt when the object file is
    // absent.
    std::optional<std::vector<std::uint8_t>> raw_read(const std::string& id) const;

    bool contains(const std::string& id) const;

    // All stored versions of the work, origin first, ordered by predecessor
    // depth where the stored chain allows it; versions whose depth cannot be
    // determined follow, ordered by id.
    std::vector<VersionId> resolve_work(const std::string& work_id) const;

    ObjectCheck check_object(const std::string& id) const;

    // Every object in the store, checked; sorted by id.
    std::vector<ObjectCheck> verify_store() const;

    std::vector<VersionId> list_versions() const;

private:
    explicit RepositoryStore(std::string root) : root_(std::move(root)) {}

    std::string object_path(std::string_view id) const;
    std::string index_path(std::string_view id) const;

    std::string root_;
};

// Copies one object byte-identically. Reads through the digest check, so a
// corrupt source is refused rather than propagated. Returns true when the
// target gained the object, false when it already held identical bytes.
bool replicate(const RepositoryStore& source, RepositoryStore& target, const std::string& id);

// Counts stores holding and holding-verified copies of id. threshold >= 1.
AuditReport audit_replicas(const std::vector<const RepositoryStore*>& stores,
                           const std::string& id, int threshold = kDefaultAuditThreshold);

// Resolves every predecessor and link reference of the stored object against
// this store and then the peers, comparing expected digests to the bytes
// actually held. Detects metadata-to-object dissociation.
LinkScanReport scan_links(const RepositoryStore& store, const std::string& id,
                          const std::vector<const RepositoryStore*>& peers);

} // namespace tdo
