#include <doctest.h>

#include "support/testutil.hpp"
#include "tdo/canonical.hpp"
#include "tdo/digest.hpp"
#include "tdo/errors.hpp"
#include "tdo/fsio.hpp"
#include "tdo/trust.hpp"

using namespace tdo;
using tdo::testing::make_trust_world;
using tdo::testing::random_tdo;
using tdo::testing::Rng;
using tdo::testing::seal_bytes;
using tdo::testing::TempDir;

TEST_CASE("signing round-trip and tamper rejection") {
    auto key = generate_keypair();
    std::vector<std::uint8_t> msg = {'m', 's', 'g'};
    auto sig = sign_message(key, msg);
    CHECK(verify_signature(key.public_key, msg, sig));

    auto tampered = msg;
    tampered[0] ^= 1;
    CHECK_FALSE(verify_signature(key.public_key, tampered, sig));

    auto other = generate_keypair();
    CHECK_FALSE(verify_signature(other.public_key, msg, sig));

    auto broken = sig;
    broken.bytes[10] ^= 1;
    CHECK_FALSE(verify_signature(key.public_key, msg, broken));
}

TEST_CASE("empty messages sign and verify") {
    auto key = generate_keypair();
    std::vector<std::uint8_t> empty;
    auto sig = sign_message(key, empty);
    CHECK(verify_signature(key.public_key, empty, sig));
}

TEST_CASE("certificate issuance rules") {
    auto world = make_trust_world();
    CHECK(world.root_cert.role == CertRole::root);
    CHECK_FALSE(world.root_cert.issuer_digest.has_value());
    REQUIRE(world.witness_cert.issuer_digest.has_value());
    CHECK(*world.witness_cert.issuer_digest == certificate_digest(world.root_cert));

    // A root certificate must attest the root's own key.
    auto stranger = generate_keypair();
    CHECK_THROWS_AS(issue_certificate(world.root_key, std::nullopt, stranger.public_key,
                                      "imposter", CertRole::root, Date{2004, 1, 1},
                                      Date{2004, 12, 31}),
                    StructuralError);

    // Non-root roles need an issuer certificate.
    CHECK_THROWS_AS(issue_certificate(world.root_key, std::nullopt, stranger.public_key,
                                      "editor", CertRole::editor, Date{2004, 1, 1},
                                      Date{2004, 12, 31}),
                    StructuralError);

    // Issuer certificate must belong to the issuing key.
    CHECK_THROWS_AS(issue_certificate(stranger, world.root_cert, stranger.public_key, "editor",
                                      CertRole::editor, Date{2004, 1, 1}, Date{2004, 12, 31}),
                    StructuralError);

    // Empty validity interval.
    CHECK_THROWS_AS(issue_certificate(world.root_key, std::nullopt, world.root_key.public_key,
                                      "root", CertRole::root, Date{2004, 12, 31},
                                      Date{2004, 1, 1}),
                    StructuralError);
}

TEST_CASE("trust store registration and lookup") {
    auto a = generate_keypair();
    auto b = generate_keypair();
    TrustStore store;
    store = register_root_epoch(std::move(store), "alexandria", 2004, a.public_key);
    store = register_root_epoch(std::move(store), "alexandria", 2005, b.public_key);
    store = add_peer_key(std::move(store), "colleague", b.public_key);

    REQUIRE(store.find_epoch("alexandria", 2004));
    CHECK(store.find_epoch("alexandria", 2004)->public_key == a.public_key);
    CHECK_FALSE(store.find_epoch("alexandria", 2006));
    CHECK_FALSE(store.find_epoch("elsewhere", 2004));
    CHECK(store.has_peer_key(b.public_key));
    CHECK_FALSE(store.has_peer_key(a.public_key));
    REQUIRE(store.find_peer("colleague"));

    CHECK_THROWS_AS(register_root_epoch(TrustStore(store), "alexandria", 2004, b.public_key),
                    StructuralError);
    CHECK_THROWS_AS(add_peer_key(TrustStore(store), "colleague", a.public_key), StructuralError);
}

TEST_CASE("trust store serialization round-trip") {
    auto a = generate_keypair();
    auto b = generate_keypair();
    TrustStore store;
    store = register_root_epoch(std::move(store), "zeta", 2010, a.public_key);
    store = register_root_epoch(std::move(store), "alpha", 2004, b.public_key);
    store = add_peer_key(std::move(store), "peer-b", b.public_key);

    auto bytes = trust_store_bytes(store);
    TrustStore back = decode_trust_store(bytes);
    CHECK(back == store);
    CHECK(trust_store_bytes(back) == bytes);

    TempDir dir;
    save_trust_store(dir.file("trust.store"), store);
    CHECK(load_trust_store(dir.file("trust.store")) == store);
    CHECK(load_trust_store(dir.file("missing.store")) == TrustStore{});
}

TEST_CASE("key files round-trip and reject corruption") {
    TempDir dir;
    auto key = generate_keypair();
    save_private_key(dir.file("k.key"), key);
    save_public_key(dir.file("k.pub"), key.public_key);

    auto loaded = load_private_key(dir.file("k.key"));
    CHECK(loaded.public_key == key.public_key);
    CHECK(loaded.private_key == key.private_key);
    CHECK(load_public_key(dir.file("k.pub")) == key.public_key);

    // The loaded private key still signs verifiably.
    std::vector<std::uint8_t> msg = {1, 2, 3};
    CHECK(verify_signature(key.public_key, msg, sign_message(loaded, msg)));

    auto bytes = read_file(dir.file("k.key"));
    bytes[bytes.size() - 1] ^= 0x40; // corrupt the seed
    CHECK_THROWS_AS(decode_private_key_file(bytes), Error);
    std::vector<std::uint8_t> garbage = {'n', 'o'};
    CHECK_THROWS_AS(decode_public_key_file(garbage), Error);
}

TEST_CASE("seal and verify accept through the epoch path") {
    Rng rng(113);
    auto world = make_trust_world();
    auto bytes = seal_bytes(random_tdo(rng), world);
    auto report = verify_seal(bytes, world.trust);
    CHECK(report.decode_ok);
    CHECK(report.signature_ok);
    CHECK(report.chain_ok);
    CHECK(report.grounding_ok);
    CHECK(report.date_ok);
    CHECK(report.accepted());
    CHECK(report.grounding_path == GroundingPath::epoch);
}

TEST_CASE("peer grounding works without any known root") {
    Rng rng(114);
    auto world = make_trust_world();
    auto bytes = seal_bytes(random_tdo(rng), world);
    TrustStore peers = add_peer_key(TrustStore{}, "the-editor", world.editor_key.public_key);
    auto report = verify_seal(bytes, peers);
    CHECK(report.accepted());
    CHECK(report.grounding_path == GroundingPath::peer);
}

TEST_CASE("seal refuses bad inputs") {
    Rng rng(115);
    auto world = make_trust_world();
    auto tdo = random_tdo(rng);

    // Wrong certificate for the signing key.
    CHECK_THROWS_AS(seal_tdo(tdo, world.editor_key, world.witness_cert, {world.root_cert},
                             world.seal_date),
                    Error);
    // Seal date outside the chain's validity.
    CHECK_THROWS_AS(seal_tdo(tdo, world.editor_key, world.editor_cert, world.editor_chain_rest,
                             Date{2007, 1, 1}),
                    Error);
    // Double sealing.
    auto sealed = decode(seal_bytes(tdo, world));
    CHECK_THROWS_AS(seal_tdo(sealed, world.editor_key, world.editor_cert,
                             world.editor_chain_rest, world.seal_date),
                    Error);
}

TEST_CASE("every report conjunct is independently falsifiable") {
    Rng rng(116);
    auto world = make_trust_world();
    auto tdo = random_tdo(rng);
    auto bytes = seal_bytes(tdo, world);

    SUBCASE("decode failure") {
        auto broken = bytes;
        broken[broken.size() / 2] ^= 0x20;
        auto report = verify_seal(broken, world.trust);
        CHECK_FALSE(report.accepted());
    }
    SUBCASE("signature failure, all else intact") {
        auto object = decode(bytes);
        object.seal->signature.bytes[7] ^= 1;
        auto report = verify_seal(encode(object).bytes, world.trust);
        CHECK(report.decode_ok);
        CHECK_FALSE(report.signature_ok);
        CHECK(report.chain_ok);
        CHECK(report.grounding_ok);
        CHECK(report.date_ok);
        CHECK_FALSE(report.accepted());
    }
    SUBCASE("chain break: missing middle link") {
        auto object = decode(bytes);
        object.seal->chain.erase(object.seal->chain.begin() + 1);
        auto report = verify_seal(encode(object).bytes, world.trust);
        CHECK(report.decode_ok);
        CHECK_FALSE(report.chain_ok);
        CHECK_FALSE(report.accepted());
    }
    SUBCASE("chain break: forged issuer signature") {
        auto object = decode(bytes);
        object.seal->chain[1].signature.bytes[3] ^= 1;
        auto report = verify_seal(encode(object).bytes, world.trust);
        CHECK(report.decode_ok);
        CHECK_FALSE(report.chain_ok);
        CHECK_FALSE(report.accepted());
    }
    SUBCASE("grounding failure: empty trust store") {
        auto report = verify_seal(bytes, TrustStore{});
        CHECK(report.decode_ok);
        CHECK(report.signature_ok);
        CHECK(report.chain_ok);
        CHECK_FALSE(report.grounding_ok);
        CHECK(report.grounding_path == GroundingPath::none);
        CHECK_FALSE(report.accepted());
    }
    SUBCASE("grounding failure: epoch registered under the wrong year") {
        TrustStore wrong =
            register_root_epoch(TrustStore{}, world.institution, 2003, world.root_key.public_key);
        auto report = verify_seal(bytes, wrong);
        CHECK_FALSE(report.grounding_ok);
        CHECK_FALSE(report.accepted());
    }
    SUBCASE("date failure: seal date outside one certificate's validity") {
        // A short-lived signer certificate, same year as the root epoch. The
        // out-of-window seal is assembled by hand; seal_tdo refuses to.
        auto brief_key = generate_keypair();
        auto brief_cert =
            issue_certificate(world.witness_key, world.witness_cert, brief_key.public_key,
                              "spring-clerk", CertRole::editor, Date{2004, 1, 1},
                              Date{2004, 3, 31});
        auto object = decode(seal_bytes(tdo, world));
        object.seal->chain[0] = brief_cert;
        object.seal->seal_date = Date{2004, 6, 15};
        object.seal->signature.bytes.assign(64, 0);
        object.seal->signature = sign_message(brief_key, seal_signing_bytes(object));
        auto report = verify_seal(encode(object).bytes, world.trust);
        CHECK(report.decode_ok);
        CHECK(report.signature_ok);
        CHECK(report.chain_ok);
        CHECK(report.grounding_ok);
        CHECK_FALSE(report.date_ok);
        CHECK_FALSE(report.accepted());
    }
}

TEST_CASE("verify_seal reports unsealed objects without throwing") {
    Rng rng(117);
    auto tdo = random_tdo(rng);
    auto report = verify_seal(encode(tdo).bytes, TrustStore{});
    CHECK(report.decode_ok);
    CHECK_FALSE(report.signature_ok);
    CHECK_FALSE(report.accepted());
    CHECK_FALSE(report.reasons.empty());
}

TEST_CASE("verify_seal never throws on garbage") {
    std::vector<std::uint8_t> garbage = {'<', 'x', '>', 0xff};
    auto report = verify_seal(garbage, TrustStore{});
    CHECK_FALSE(report.decode_ok);
    CHECK_FALSE(report.accepted());
    CHECK_FALSE(report.reasons.empty());
}
