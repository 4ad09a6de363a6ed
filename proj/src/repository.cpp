#include "tdo/repository.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "tdo/canonical.hpp"
#include "tdo/digest.hpp"
#include "tdo/errors.hpp"
#include "tdo/fsio.hpp"
#include "tdo/markup.hpp"
#include "tdo/textcodec.hpp"

namespace fs = std::filesystem;

namespace tdo {

namespace {

constexpr std::size_t kIdLength = 64; // lowercase hex of a 32-byte digest

struct IndexEntry {
    Digest digest;
    std::string version;
    std::string work;
};

std::vector<std::uint8_t> index_bytes(const IndexEntry& e) {
    Node n("object");
    n.set_attr("digest", hex_encode(e.digest.bytes));
    n.set_attr("version", e.version);
    n.set_attr("work", e.work);
    std::string doc = emit_document(n);
    return std::vector<std::uint8_t>(doc.begin(), doc.end());
}

IndexEntry decode_index(std::span<const std::uint8_t> bytes) {
    Node n = parse_document(bytes);
    if (n.name != "object" || !n.children.empty() || !n.text.empty() || n.attrs.size() != 3)
        throw CanonicalityError("index record has unexpected shape");
    IndexEntry e;
    e.digest.algorithm_tag = std::string(kDefaultDigestAlgorithm);
    bool saw_digest = false;
    for (const auto& [key, value] : n.attrs) {
        if (key == "digest") {
            auto raw = hex_decode(value);
            if (!raw || raw->size() * 2 != kIdLength)
                throw CanonicalityError("index digest is malformed");
            e.digest.bytes = std::move(*raw);
            saw_digest = true;
        } else if (key == "version") {
            e.version = value;
        } else if (key == "work") {
            e.work = value;
        } else {
            throw CanonicalityError("index record has unknown attribute " + key);
        }
    }
    if (!saw_digest || !is_object_id(e.version) || !is_object_id(e.work))
        throw CanonicalityError("index record is incomplete");
    auto reemitted = index_bytes(e);
    if (reemitted.size() != bytes.size() ||
        !std::equal(reemitted.begin(), reemitted.end(), bytes.begin()))
        throw CanonicalityError("index record is not in canonical form");
    return e;
}

// Temp file beside the destination, then rename: readers never observe a
// partial file, and rename within one directory is atomic.
void write_atomic(const fs::path& dest, std::span<const std::uint8_t> bytes) {
    fs::create_directories(dest.parent_path());
    fs::path tmp = dest;
    tmp += ".tmp";
    write_file(tmp.string(), bytes);
    std::error_code ec;
    fs::rename(tmp, dest, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " into place");
    }
}

std::string shard(std::string_view id) { return std::string(id.substr(0, 2)); }

// Ids found by listing one of the sharded trees.
std::set<std::string> list_tree(const fs::path& tree, std::string_view ext) {
    std::set<std::string> ids;
    std::error_code ec;
    for (fs::directory_iterator shard_it(tree, ec); !ec && shard_it != fs::directory_iterator();
         shard_it.increment(ec)) {
        if (!shard_it->is_directory(ec)) continue;
        std::error_code ec2;
        for (fs::directory_iterator it(shard_it->path(), ec2);
             !ec2 && it != fs::directory_iterator(); it.increment(ec2)) {
            fs::path p = it->path();
            if (p.extension() != ext) continue;
            std::string id = p.stem().string();
            if (is_object_id(id)) ids.insert(std::move(id));
        }
    }
    return ids;
}

} // namespace

bool is_object_id(std::string_view id) {
    if (id.size() != kIdLength) return false;
    for (char c : id)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

std::string_view to_string(LinkOutcome o) {
    switch (o) {
        case LinkOutcome::resolved_match: return "resolved_match";
        case LinkOutcome::resolved_mismatch: return "resolved_mismatch";
        case LinkOutcome::unresolved: return "unresolved";
    }
    return "unresolved";
}

RepositoryStore RepositoryStore::open(std::string root_path) {
    fs::path root(root_path);
    std::error_code ec;
    fs::create_directories(root / "objects", ec);
    if (ec) throw IoError("cannot create store at " + root_path);
    fs::create_directories(root / "index", ec);
    if (ec) throw IoError("cannot create store at " + root_path);
    return RepositoryStore(std::move(root_path));
}

std::string RepositoryStore::object_path(std::string_view id) const {
    return (fs::path(root_) / "objects" / shard(id) / (std::string(id) + ".tdo")).string();
}

std::string RepositoryStore::index_path(std::string_view id) const {
    return (fs::path(root_) / "index" / shard(id) / (std::string(id) + ".idx")).string();
}

VersionId RepositoryStore::ingest(std::span<const std::uint8_t> sealed_bytes) {
    TrustworthyDigitalObject object = decode(sealed_bytes);
    VersionId recomputed = derive_version_id(object.payload);
    if (recomputed.value != object.protection.version_id.value)
        throw StructuralError(
            "forged identifier: embedded version id does not match the payload digest");
    auto violations = validate_structure(object);
    if (!violations.empty()) {
        std::string msg = "object refused:";
        for (const auto& v : violations) msg += " " + v.field + ": " + v.rule + ";";
        throw StructuralError(msg);
    }
    if (!object.seal) throw StructuralError("only sealed objects are ingested");

    const std::string& id = object.protection.version_id.value;
    std::string opath = object_path(id);
    IndexEntry entry{sha256(sealed_bytes), id, object.protection.work_id.value};
    if (file_exists(opath)) {
        auto stored = read_file(opath);
        if (stored.size() != sealed_bytes.size() ||
            !std::equal(stored.begin(), stored.end(), sealed_bytes.begin()))
            throw StructuralError("store already holds different bytes under id " + id);
        // Idempotent, but repair an index lost to a crash between the writes.
        if (!file_exists(index_path(id))) write_atomic(index_path(id), index_bytes(entry));
        return object.protection.version_id;
    }

    write_atomic(opath, sealed_bytes);
    write_atomic(index_path(id), index_bytes(entry));
    return object.protection.version_id;
}

std::vector<std::uint8_t> RepositoryStore::retrieve(const std::string& id) const {
    if (!is_object_id(id) || !file_exists(index_path(id)))
        throw StoreError("unknown object " + id);
    IndexEntry entry = decode_index(read_file(index_path(id)));
    if (!file_exists(object_path(id)))
        throw StoreError("stored object " + id + " is missing its bytes");
    auto bytes = read_file(object_path(id));
    if (sha256(bytes).bytes != entry.digest.bytes)
        throw StoreError("stored object " + id + " is corrupt");
    return bytes;
}

std::optional<std::vector<std::uint8_t>> RepositoryStore::raw_read(const std::string& id) const {
    if (!is_object_id(id) || !file_exists(object_path(id))) return std::nullopt;
    return read_file(object_path(id));
}

bool RepositoryStore::contains(const std::string& id) const {
    return is_object_id(id) && file_exists(object_path(id));
}

ObjectCheck RepositoryStore::check_object(const std::string& id) const {
    ObjectCheck check;
    check.id.value = id;
    if (!contains(id)) return check;
    check.found = true;
    try {
        auto bytes = retrieve(id);
        TrustworthyDigitalObject object = decode(bytes);
        check.verified = object.protection.version_id.value == id &&
                         validate_structure(object).empty() && object.seal.has_value();
    } catch (const Error&) {
        check.verified = false;
    }
    return check;
}

std::vector<VersionId> RepositoryStore::list_versions() const {
    auto objects = list_tree(fs::path(root_) / "objects", ".tdo");
    auto indexed = list_tree(fs::path(root_) / "index", ".idx");
    objects.insert(indexed.begin(), indexed.end());
    std::vector<VersionId> out;
    out.reserve(objects.size());
    for (auto& id : objects) out.push_back(VersionId{id});
    return out;
}

std::vector<ObjectCheck> RepositoryStore::verify_store() const {
    std::vector<ObjectCheck> out;
    for (const auto& id : list_versions()) out.push_back(check_object(id.value));
    return out;
}

std::vector<VersionId> RepositoryStore::resolve_work(const std::string& work_id) const {
    std::vector<std::string> members;
    for (const auto& vid : list_versions()) {
        std::string ipath = index_path(vid.value);
        if (!file_exists(ipath)) continue;
        try {
            IndexEntry entry = decode_index(read_file(ipath));
            if (entry.work == work_id) members.push_back(vid.value);
        } catch (const Error&) {
            // An unreadable index cannot attest work membership.
        }
    }

    // Depth along the first-predecessor chain, walked through stored objects
    // only. A missing, undecodable, or cyclic link leaves depth unknown.
    std::map<std::string, std::optional<std::uint64_t>> memo;
    std::set<std::string> walking;
    auto depth = [&](auto&& self, const std::string& id) -> std::optional<std::uint64_t> {
        if (auto it = memo.find(id); it != memo.end()) return it->second;
        if (!walking.insert(id).second) return std::nullopt;
        std::optional<std::uint64_t> d;
        if (auto bytes = raw_read(id)) {
            try {
                TrustworthyDigitalObject object = decode(*bytes);
                if (object.protection.predecessors.empty()) {
                    d = 0;
                } else if (auto pd = self(self, object.protection.predecessors.front().target)) {
                    d = *pd + 1;
                }
            } catch (const Error&) {
            }
        }
        walking.erase(id);
        memo[id] = d;
        return d;
    };

    std::vector<std::pair<std::optional<std::uint64_t>, std::string>> keyed;
    keyed.reserve(members.size());
    for (auto& id : members) keyed.emplace_back(depth(depth, id), id);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first.has_value() != b.first.has_value()) return a.first.has_value();
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    std::vector<VersionId> out;
    out.reserve(keyed.size());
    for (auto& [d, id] : keyed) out.push_back(VersionId{id});
    return out;
}

bool replicate(const RepositoryStore& source, RepositoryStore& target, const std::string& id) {
    auto bytes = source.retrieve(id); // throws on source corruption
    if (target.contains(id)) {
        auto held = target.raw_read(id);
        if (held && held->size() == bytes.size() &&
            std::equal(held->begin(), held->end(), bytes.begin()))
            return false;
        throw StructuralError("target already holds different bytes under id " + id);
    }
    target.ingest(bytes);
    return true;
}

AuditReport audit_replicas(const std::vector<const RepositoryStore*>& stores,
                           const std::string& id, int threshold) {
    if (threshold < 1) throw StructuralError("audit threshold must be at least 1");
    AuditReport report;
    report.version_id.value = id;
    report.threshold = threshold;
    for (const RepositoryStore* store : stores) {
        ObjectCheck check = store->check_object(id);
        if (check.found) ++report.replicas_found;
        if (check.verified) ++report.replicas_verified;
    }
    report.at_risk = report.replicas_verified < threshold;
    return report;
}

LinkScanReport scan_links(const RepositoryStore& store, const std::string& id,
                          const std::vector<const RepositoryStore*>& peers) {
    TrustworthyDigitalObject object = decode(store.retrieve(id));
    std::vector<const RepositoryStore*> all;
    all.push_back(&store);
    all.insert(all.end(), peers.begin(), peers.end());

    LinkScanReport report;
    report.version_id = object.protection.version_id;
    auto scan_one = [&](const ExternalReference& ref, bool from_predecessors) {
        LinkCheck check{ref, from_predecessors, LinkOutcome::unresolved};
        for (const RepositoryStore* s : all) {
            auto bytes = s->raw_read(ref.target);
            if (!bytes) continue;
            if (ref.expected_digest && sha256(*bytes).bytes == ref.expected_digest->bytes) {
                check.outcome = LinkOutcome::resolved_match;
                break;
            }
            check.outcome = LinkOutcome::resolved_mismatch;
        }
        report.checks.push_back(std::move(check));
    };
    for (const auto& ref : object.protection.predecessors) scan_one(ref, true);
    for (const auto& ref : object.protection.links) scan_one(ref, false);
    return report;
}

} // namespace tdo
