#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "support/ref_sha256.hpp"
#include "support/testutil.hpp"
#include "tdo/canonical.hpp"
#include "tdo/digest.hpp"
#include "tdo/errors.hpp"
#include "tdo/provenance.hpp"
#include "tdo/repository.hpp"

using namespace tdo;
using tdo::testing::make_trust_world;
using tdo::testing::random_tdo;
using tdo::testing::Rng;
using tdo::testing::seal_bytes;
using tdo::testing::TempDir;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

struct StoreFixture {
    testing::TrustWorld world = make_trust_world();
    TempDir dir;

    RepositoryStore open(const std::string& name) { return RepositoryStore::open(dir.file(name)); }

    std::vector<std::uint8_t> sealed(std::string_view text) {
        ContentBlob blob;
        blob.name = "content";
        blob.media_hint = "text/plain";
        blob.bytes = bytes_of(text);
        auto tdo = new_tdo({blob}, {}, {"keeper", "", "deposit"});
        return seal_bytes(tdo, world);
    }

    // Derives a sealed successor of `pred_bytes` whose payload is `text`.
    std::vector<std::uint8_t> successor(const std::vector<std::uint8_t>& pred_bytes,
                                        std::string_view text) {
        auto source = bytes_of("x");
        auto statement = make_statement(source);
        statement = record_transformation(std::move(statement), "identity-copy", source,
                                          source, "keeper", "copying", Date{2004, 8, 1});
        ContentBlob blob;
        blob.name = "content";
        blob.media_hint = "text/plain";
        blob.bytes = bytes_of(text);
        auto next = derive_version(pred_bytes, {blob}, DeriveMode::link, statement,
                                   {"keeper", "", "copying"}, {}, world.trust);
        return seal_bytes(next, world);
    }
};

std::string id_of(const std::vector<std::uint8_t>& sealed) {
    return decode(sealed).protection.version_id.value;
}

// Flips one bit of the stored object file.
void corrupt_object_file(const RepositoryStore& store, const std::string& id) {
    namespace fs = std::filesystem;
    std::string path = store.root() + "/objects/" + id.substr(0, 2) + "/" + id + ".tdo";
    REQUIRE(fs::exists(path));
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    in.close();
    bytes[bytes.size() / 2] ^= 0x01;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("object id well-formedness") {
    CHECK(is_object_id(std::string(64, 'a')));
    CHECK(is_object_id("0123456789abcdef0123456789abcdef0123456789abcdef0123456789abcdef"));
    CHECK_FALSE(is_object_id(std::string(63, 'a')));
    CHECK_FALSE(is_object_id(std::string(64, 'A')));
    CHECK_FALSE(is_object_id(std::string(64, 'g')));
    CHECK_FALSE(is_object_id(""));
}

TEST_CASE("ingest and retrieve round trip") {
    StoreFixture fix;
    auto store = fix.open("a");
    auto sealed = fix.sealed("first deposit");
    auto id = store.ingest(sealed);
    CHECK(id.value == id_of(sealed));
    CHECK(store.contains(id.value));
    CHECK(store.retrieve(id.value) == sealed);
    CHECK(store.raw_read(id.value) == sealed);
    CHECK(store.list_versions() == std::vector<VersionId>{id});

    // Identical bytes land idempotently; different bytes under the same id
    // are impossible to fake without breaking the digest, so simulate the
    // conflict by asking the store to accept a second object after forcing
    // the first one's file aside is out of scope; identical re-ingest:
    CHECK(store.ingest(sealed).value == id.value);
    CHECK(store.list_versions().size() == 1);
}

TEST_CASE("ingest validates at the door") {
    StoreFixture fix;
    auto store = fix.open("a");

    SUBCASE("unknown ids and absent objects") {
        CHECK_FALSE(store.contains(std::string(64, 'b')));
        CHECK_THROWS_AS(store.retrieve(std::string(64, 'b')), StoreError);
        CHECK_FALSE(store.raw_read(std::string(64, 'b')).has_value());
    }
    SUBCASE("non-canonical bytes") {
        auto sealed = fix.sealed("x");
        sealed.push_back('\n');
        CHECK_THROWS_AS(store.ingest(sealed), Error);
    }
    SUBCASE("unsealed objects") {
        Rng rng(5);
        auto unsealed = encode(random_tdo(rng)).bytes;
        CHECK_THROWS_AS(store.ingest(unsealed), StructuralError);
    }
    SUBCASE("forged identifiers") {
        // Rewrite the version id consistently so the document stays canonical
        // but the id no longer matches the payload digest.
        auto sealed = fix.sealed("y");
        std::string text(sealed.begin(), sealed.end());
        std::string id = id_of(sealed);
        std::string forged = id;
        forged[0] = forged[0] == 'f' ? '0' : 'f';
        std::size_t pos = 0;
        while ((pos = text.find(id, pos)) != std::string::npos) {
            text.replace(pos, id.size(), forged);
            pos += forged.size();
        }
        std::vector<std::uint8_t> doctored(text.begin(), text.end());
        CHECK_THROWS_WITH_AS(store.ingest(doctored),
                             doctest::Contains("forged identifier"), StructuralError);
    }
}

TEST_CASE("retrieval is digest-verified") {
    StoreFixture fix;
    auto store = fix.open("a");
    auto sealed = fix.sealed("guarded");
    auto id = store.ingest(sealed).value;

    corrupt_object_file(store, id);
    CHECK(store.contains(id));
    CHECK(store.raw_read(id).has_value()); // raw bytes come back unchecked
    CHECK(store.raw_read(id) != sealed);
    CHECK_THROWS_AS(store.retrieve(id), StoreError);

    auto check = store.check_object(id);
    CHECK(check.found);
    CHECK_FALSE(check.verified);
}

TEST_CASE("store-wide verification reports every object") {
    StoreFixture fix;
    auto store = fix.open("a");
    auto good = store.ingest(fix.sealed("good")).value;
    auto bad = store.ingest(fix.sealed("bad")).value;
    corrupt_object_file(store, bad);

    auto checks = store.verify_store();
    REQUIRE(checks.size() == 2);
    CHECK(checks[0].id.value < checks[1].id.value);
    for (const auto& c : checks) {
        CHECK(c.found);
        CHECK(c.verified == (c.id.value == good));
    }
}

TEST_CASE("work resolution orders versions by depth") {
    StoreFixture fix;
    auto store = fix.open("a");
    auto v1 = fix.sealed("origin");
    auto v2 = fix.successor(v1, "second");
    auto v3 = fix.successor(v2, "third");
    store.ingest(v3);
    store.ingest(v1);
    store.ingest(v2);

    auto work = decode(v1).protection.version_id.value;
    auto chain = store.resolve_work(work);
    REQUIRE(chain.size() == 3);
    CHECK(chain[0].value == id_of(v1));
    CHECK(chain[1].value == id_of(v2));
    CHECK(chain[2].value == id_of(v3));

    CHECK(store.resolve_work(std::string(64, 'c')).empty());

    // With the middle version absent the tail's depth is unknowable; it still
    // belongs to the work and follows the resolvable prefix.
    auto partial = fix.open("b");
    partial.ingest(v1);
    partial.ingest(v3);
    auto arc = partial.resolve_work(work);
    REQUIRE(arc.size() == 2);
    CHECK(arc[0].value == id_of(v1));
    CHECK(arc[1].value == id_of(v3));
}

TEST_CASE("replication copies bytes, not corruption") {
    StoreFixture fix;
    auto source = fix.open("src");
    auto target = fix.open("dst");
    auto sealed = fix.sealed("travelling");
    auto id = source.ingest(sealed).value;

    CHECK(replicate(source, target, id));
    CHECK(target.retrieve(id) == sealed);
    CHECK_FALSE(replicate(source, target, id)); // already held

    auto damaged = fix.open("damaged");
    auto id2 = damaged.ingest(fix.sealed("spoiled")).value;
    corrupt_object_file(damaged, id2);
    CHECK_THROWS_AS(replicate(damaged, target, id2), StoreError);
    CHECK_FALSE(target.contains(id2));
}

TEST_CASE("replica audit counts verified copies against the threshold") {
    StoreFixture fix;
    auto a = fix.open("a");
    auto b = fix.open("b");
    auto c = fix.open("c");
    auto sealed = fix.sealed("precious");
    auto id = a.ingest(sealed).value;
    replicate(a, b, id);
    replicate(a, c, id);

    std::vector<const RepositoryStore*> all = {&a, &b, &c};
    auto report = audit_replicas(all, id);
    CHECK(report.replicas_found == 3);
    CHECK(report.replicas_verified == 3);
    CHECK(report.threshold == kDefaultAuditThreshold);
    CHECK_FALSE(report.at_risk);

    SUBCASE("a silently corrupted replica counts as found but unverified") {
        corrupt_object_file(b, id);
        auto damaged = audit_replicas(all, id);
        CHECK(damaged.replicas_found == 3);
        CHECK(damaged.replicas_verified == 2);
        CHECK_FALSE(damaged.at_risk);

        corrupt_object_file(c, id);
        auto risky = audit_replicas(all, id);
        CHECK(risky.replicas_found == 3);
        CHECK(risky.replicas_verified == 1);
        CHECK(risky.at_risk);
    }
    SUBCASE("absence drops the found count") {
        auto partial = audit_replicas({&a, &b}, id);
        CHECK(partial.replicas_found == 2);
        CHECK_FALSE(partial.at_risk);
        auto last = audit_replicas({&a}, id);
        CHECK(last.replicas_found == 1);
        CHECK(last.at_risk);
    }
    SUBCASE("the threshold is adjustable but must be sane") {
        CHECK(audit_replicas(all, id, 3).at_risk == false);
        CHECK(audit_replicas(all, id, 4).at_risk == true);
        CHECK_THROWS_AS(audit_replicas(all, id, 0), StructuralError);
    }
    SUBCASE("an id nobody holds is at risk") {
        auto missing = audit_replicas(all, std::string(64, 'd'));
        CHECK(missing.replicas_found == 0);
        CHECK(missing.replicas_verified == 0);
        CHECK(missing.at_risk);
    }
}

TEST_CASE("link scanning classifies every reference") {
    StoreFixture fix;
    auto store = fix.open("main");
    auto peer = fix.open("peer");

    auto cited = fix.sealed("cited elsewhere");
    auto far = fix.sealed("held by the peer");
    auto origin = fix.sealed("origin");

    // A successor whose links point at the cited and far objects.
    auto source = bytes_of("x");
    auto statement = make_statement(source);
    statement = record_transformation(std::move(statement), "identity-copy", source, source,
                                      "keeper", "copying", Date{2004, 8, 2});
    ContentBlob blob;
    blob.name = "content";
    blob.media_hint = "text/plain";
    blob.bytes = bytes_of("linker");
    auto linker = derive_version(origin, {blob}, DeriveMode::link, statement,
                                 {"keeper", "", "copying"}, {}, fix.world.trust);
    ExternalReference cite;
    cite.target_kind = RefKind::version;
    cite.target = id_of(cited);
    cite.expected_digest = sha256(cited);
    cite.relation = "cites";
    ExternalReference reach;
    reach.target_kind = RefKind::version;
    reach.target = id_of(far);
    reach.expected_digest = sha256(far);
    reach.relation = "cites";
    ExternalReference ghost;
    ghost.target_kind = RefKind::version;
    ghost.target = std::string(64, 'e');
    ghost.expected_digest = sha256(bytes_of("nothing"));
    ghost.relation = "cites";
    linker.protection.links = {cite, reach, ghost};
    auto linker_bytes = seal_bytes(linker, fix.world);

    store.ingest(origin);
    store.ingest(cited);
    store.ingest(linker_bytes);
    peer.ingest(far);

    auto report = scan_links(store, id_of(linker_bytes), {&peer});
    CHECK(report.version_id.value == id_of(linker_bytes));
    REQUIRE(report.checks.size() == 4); // predecessor + three links

    CHECK(report.checks[0].from_predecessors);
    CHECK(report.checks[0].outcome == LinkOutcome::resolved_match);
    CHECK(report.checks[1].ref.target == id_of(cited));
    CHECK(report.checks[1].outcome == LinkOutcome::resolved_match);
    CHECK_FALSE(report.checks[1].from_predecessors);
    CHECK(report.checks[2].ref.target == id_of(far)); // found through the peer
    CHECK(report.checks[2].outcome == LinkOutcome::resolved_match);
    CHECK(report.checks[3].outcome == LinkOutcome::unresolved);

    SUBCASE("mutating a referent dissociates it") {
        corrupt_object_file(store, id_of(cited));
        auto after = scan_links(store, id_of(linker_bytes), {&peer});
        CHECK(after.checks[1].outcome == LinkOutcome::resolved_mismatch);
        CHECK(after.checks[0].outcome == LinkOutcome::resolved_match);
        CHECK(after.checks[2].outcome == LinkOutcome::resolved_match);
    }
    SUBCASE("outcome names are fixed") {
        CHECK(to_string(LinkOutcome::resolved_match) == "resolved_match");
        CHECK(to_string(LinkOutcome::resolved_mismatch) == "resolved_mismatch");
        CHECK(to_string(LinkOutcome::unresolved) == "unresolved");
    }
}

TEST_CASE("the store survives reopening") {
    StoreFixture fix;
    auto sealed = fix.sealed("persistent");
    std::string id;
    {
        auto store = fix.open("a");
        id = store.ingest(sealed).value;
    }
    auto reopened = RepositoryStore::open(fix.dir.file("a"));
    CHECK(reopened.retrieve(id) == sealed);
    CHECK(reopened.check_object(id).verified);
}
