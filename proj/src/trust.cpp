#include "tdo/trust.hpp"

#include <algorithm>
#include <charconv>
#include <memory>

#include <openssl/evp.h>

#include "tdo/canonical.hpp"
#include "tdo/errors.hpp"
#include "tdo/fsio.hpp"
#include "tdo/markup.hpp"
#include "tdo/textcodec.hpp"

namespace tdo {

namespace {

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

void require_ed25519(std::string_view tag) {
    if (tag != kDefaultSignatureAlgorithm) {
        throw CryptoError("unknown signature algorithm tag \"" + std::string(tag) + "\"");
    }
}

PkeyPtr raw_private(std::span<const std::uint8_t> seed) {
    EVP_PKEY* p = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
    if (!p) {
        throw CryptoError("cannot load private key");
    }
    return PkeyPtr{p, EVP_PKEY_free};
}

PkeyPtr raw_public(std::span<const std::uint8_t> pub) {
    EVP_PKEY* p = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size());
    if (!p) {
        throw CryptoError("cannot load public key");
    }
    return PkeyPtr{p, EVP_PKEY_free};
}

std::vector<std::uint8_t> raw_public_bytes(EVP_PKEY* key) {
    std::size_t len = 0;
    if (EVP_PKEY_get_raw_public_key(key, nullptr, &len) != 1) {
        throw CryptoError("cannot extract public key");
    }
    std::vector<std::uint8_t> out(len);
    if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != out.size()) {
        throw CryptoError("cannot extract public key");
    }
    return out;
}

const std::uint8_t* data_or_dummy(std::span<const std::uint8_t> s) {
    static const std::uint8_t dummy = 0;
    return s.empty() ? &dummy : s.data();
}

} // namespace

KeyPair generate_keypair(std::string_view algorithm_tag) {
    require_ed25519(algorithm_tag);
    PkeyCtxPtr ctx{EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr), EVP_PKEY_CTX_free};
    if (!ctx || EVP_PKEY_keygen_init(ctx.get()) != 1) {
        throw CryptoError("key generation init failed");
    }
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_keygen(ctx.get(), &raw) != 1) {
        throw CryptoError("key generation failed");
    }
    PkeyPtr key{raw, EVP_PKEY_free};
    std::size_t priv_len = 0;
    if (EVP_PKEY_get_raw_private_key(key.get(), nullptr, &priv_len) != 1) {
        throw CryptoError("cannot extract private key");
    }
    std::vector<std::uint8_t> priv(priv_len);
    if (EVP_PKEY_get_raw_private_key(key.get(), priv.data(), &priv_len) != 1) {
        throw CryptoError("cannot extract private key");
    }
    KeyPair out;
    out.algorithm_tag = std::string(algorithm_tag);
    out.public_key = PublicKey{std::string(algorithm_tag), raw_public_bytes(key.get())};
    out.private_key = std::move(priv);
    return out;
}

SignatureValue sign_message(const KeyPair& key, std::span<const std::uint8_t> message) {
    require_ed25519(key.algorithm_tag);
    if (key.private_key.size() != 32) {
        throw CryptoError("private key has the wrong length");
    }
    PkeyPtr pkey = raw_private(key.private_key);
    MdCtxPtr md{EVP_MD_CTX_new(), EVP_MD_CTX_free};
    if (!md || EVP_DigestSignInit(md.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
        throw CryptoError("signing init failed");
    }
    std::size_t sig_len = 0;
    if (EVP_DigestSign(md.get(), nullptr, &sig_len, data_or_dummy(message), message.size()) != 1) {
        throw CryptoError("signing failed");
    }
    std::vector<std::uint8_t> sig(sig_len);
    if (EVP_DigestSign(md.get(), sig.data(), &sig_len, data_or_dummy(message), message.size()) != 1) {
        throw CryptoError("signing failed");
    }
    sig.resize(sig_len);
    return SignatureValue{key.algorithm_tag, std::move(sig)};
}

bool verify_signature(const PublicKey& key, std::span<const std::uint8_t> message,
                      const SignatureValue& signature) {
    if (key.algorithm_tag != kDefaultSignatureAlgorithm ||
        signature.algorithm_tag != kDefaultSignatureAlgorithm || key.bytes.size() != 32 ||
        signature.bytes.size() != 64) {
        return false;
    }
    try {
        PkeyPtr pkey = raw_public(key.bytes);
        MdCtxPtr md{EVP_MD_CTX_new(), EVP_MD_CTX_free};
        if (!md || EVP_DigestVerifyInit(md.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
            return false;
        }
        return EVP_DigestVerify(md.get(), signature.bytes.data(), signature.bytes.size(),
                                data_or_dummy(message), message.size()) == 1;
    } catch (const CryptoError&) {
        return false;
    }
}

Digest certificate_digest(const Certificate& cert) {
    return sha256(certificate_bytes(cert));
}

Certificate issue_certificate(const KeyPair& issuer,
                              const std::optional<Certificate>& issuer_cert,
                              const PublicKey& subject_public_key,
                              const std::string& subject_name, CertRole role, Date valid_from,
                              Date valid_to) {
    require_ed25519(issuer.algorithm_tag);
    if (!valid_from.valid() || !valid_to.valid()) {
        throw StructuralError("certificate validity dates are not calendar dates");
    }
    if (valid_to < valid_from) {
        throw StructuralError("certificate validity interval is empty");
    }
    if (subject_name.empty()) {
        throw StructuralError("certificate subject name must not be empty");
    }
    if ((role == CertRole::root) == issuer_cert.has_value()) {
        throw StructuralError(role == CertRole::root
                                  ? "a root certificate is self-attested and takes no issuer certificate"
                                  : "a non-root certificate requires its issuer's certificate");
    }
    Certificate cert;
    cert.subject_public_key = subject_public_key;
    cert.subject_name = subject_name;
    cert.role = role;
    cert.valid_from = valid_from;
    cert.valid_to = valid_to;
    cert.signature.algorithm_tag = issuer.algorithm_tag;
    if (issuer_cert) {
        if (issuer_cert->subject_public_key != issuer.public_key) {
            throw StructuralError("issuer certificate does not belong to the issuing key");
        }
        cert.issuer_digest = certificate_digest(*issuer_cert);
    } else {
        if (subject_public_key != issuer.public_key) {
            throw StructuralError("a self-attested root must certify its own key");
        }
    }
    cert.signature = sign_message(issuer, certificate_signing_bytes(cert));
    return cert;
}

// ---------------------------------------------------------------------------
// Trust store
// ---------------------------------------------------------------------------

namespace {

bool epoch_less(const KeyEpoch& a, const KeyEpoch& b) {
    if (a.institution != b.institution) return a.institution < b.institution;
    return a.year < b.year;
}

bool peer_less(const PeerKey& a, const PeerKey& b) {
    return a.name < b.name;
}

void check_store_key(const PublicKey& key) {
    if (key.algorithm_tag != kDefaultSignatureAlgorithm || key.bytes.size() != 32) {
        throw StructuralError("trust store entries require a 32-byte ed25519 public key");
    }
}

Node key_node(const PublicKey& key) {
    Node n{"key"};
    n.set_attr("algorithm", key.algorithm_tag);
    n.set_text(base64_encode(key.bytes));
    return n;
}

Node trust_store_node(const TrustStore& store) {
    Node root{"trust-store"};
    root.set_attr("format", "TDO/1");
    Node roots{"roots"};
    for (const KeyEpoch& e : store.root_epochs) {
        Node epoch{"epoch"};
        epoch.set_attr("institution", e.institution);
        epoch.set_attr("year", std::to_string(e.year));
        epoch.add_child(key_node(e.public_key));
        roots.add_child(std::move(epoch));
    }
    root.add_child(std::move(roots));
    Node peers{"peers"};
    for (const PeerKey& p : store.peer_keys) {
        Node peer{"peer"};
        peer.set_attr("name", p.name);
        peer.add_child(key_node(p.public_key));
        peers.add_child(std::move(peer));
    }
    root.add_child(std::move(peers));
    return root;
}

std::string strict_attr(const Node& n, std::string_view name) {
    auto v = n.attr(name);
    if (!v) {
        throw CanonicalityError("missing attribute \"" + std::string(name) + "\" on <" + n.name +
                                ">");
    }
    return std::string(*v);
}

PublicKey read_key_node(const Node& n) {
    if (n.name != "key" || n.attrs.size() != 1 || !n.children.empty()) {
        throw CanonicalityError("expected a <key> element");
    }
    PublicKey key;
    key.algorithm_tag = strict_attr(n, "algorithm");
    auto bytes = base64_decode(n.text);
    if (!bytes) {
        throw CanonicalityError("<key> does not hold canonical base64");
    }
    key.bytes = std::move(*bytes);
    return key;
}

int read_year(const std::string& text) {
    if (text.empty() || (text.size() > 1 && text[0] == '0')) {
        throw CanonicalityError("year is not a minimal decimal integer");
    }
    int year = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), year);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw CanonicalityError("year is not a minimal decimal integer");
    }
    return year;
}

} // namespace

const KeyEpoch* TrustStore::find_epoch(std::string_view institution, int year) const {
    for (const KeyEpoch& e : root_epochs) {
        if (e.institution == institution && e.year == year) {
            return &e;
        }
    }
    return nullptr;
}

const PeerKey* TrustStore::find_peer(std::string_view name) const {
    for (const PeerKey& p : peer_keys) {
        if (p.name == name) {
            return &p;
        }
    }
    return nullptr;
}

bool TrustStore::has_peer_key(const PublicKey& key) const {
    return std::any_of(peer_keys.begin(), peer_keys.end(),
                       [&](const PeerKey& p) { return p.public_key == key; });
}

TrustStore register_root_epoch(TrustStore store, std::string institution, int year,
                               PublicKey public_key) {
    if (institution.empty() || !utf8_valid(institution) || !attr_value_safe(institution)) {
        throw StructuralError("institution name must be plain non-empty text");
    }
    if (year < 1 || year > 9999) {
        throw StructuralError("epoch year out of range");
    }
    check_store_key(public_key);
    if (store.find_epoch(institution, year)) {
        throw StructuralError("an epoch for (" + institution + ", " + std::to_string(year) +
                              ") is already registered");
    }
    KeyEpoch epoch{std::move(institution), year, std::move(public_key)};
    auto pos = std::upper_bound(store.root_epochs.begin(), store.root_epochs.end(), epoch,
                                epoch_less);
    store.root_epochs.insert(pos, std::move(epoch));
    return store;
}

TrustStore add_peer_key(TrustStore store, std::string name, PublicKey public_key) {
    if (name.empty() || !utf8_valid(name) || !attr_value_safe(name)) {
        throw StructuralError("peer name must be plain non-empty text");
    }
    check_store_key(public_key);
    if (store.find_peer(name)) {
        throw StructuralError("a peer named \"" + name + "\" is already registered");
    }
    PeerKey peer{std::move(name), std::move(public_key)};
    auto pos = std::upper_bound(store.peer_keys.begin(), store.peer_keys.end(), peer, peer_less);
    store.peer_keys.insert(pos, std::move(peer));
    return store;
}

std::vector<std::uint8_t> trust_store_bytes(const TrustStore& store) {
    return to_byte_vector(emit_document(trust_store_node(store)));
}

TrustStore decode_trust_store(std::span<const std::uint8_t> bytes) {
    Node root = parse_document(bytes);
    if (root.name != "trust-store" || root.attrs.size() != 1 ||
        root.attr("format") != std::optional<std::string_view>("TDO/1")) {
        throw CanonicalityError("document element is not <trust-store format=\"TDO/1\">");
    }
    if (root.children.size() != 2 || root.children[0].name != "roots" ||
        root.children[1].name != "peers") {
        throw CanonicalityError("<trust-store> must hold <roots> then <peers>");
    }
    TrustStore store;
    const Node& roots = root.children[0];
    if (!roots.attrs.empty()) {
        throw CanonicalityError("unexpected attribute on <roots>");
    }
    for (const Node& child : roots.children) {
        if (child.name != "epoch" || child.attrs.size() != 2 || child.children.size() != 1) {
            throw CanonicalityError("expected <epoch> with institution, year and one <key>");
        }
        KeyEpoch e;
        e.institution = strict_attr(child, "institution");
        e.year = read_year(strict_attr(child, "year"));
        e.public_key = read_key_node(child.children[0]);
        store.root_epochs.push_back(std::move(e));
    }
    const Node& peers = root.children[1];
    if (!peers.attrs.empty()) {
        throw CanonicalityError("unexpected attribute on <peers>");
    }
    for (const Node& child : peers.children) {
        if (child.name != "peer" || child.attrs.size() != 1 || child.children.size() != 1) {
            throw CanonicalityError("expected <peer> with a name and one <key>");
        }
        PeerKey p;
        p.name = strict_attr(child, "name");
        p.public_key = read_key_node(child.children[0]);
        store.peer_keys.push_back(std::move(p));
    }
    for (std::size_t i = 1; i < store.root_epochs.size(); ++i) {
        if (!epoch_less(store.root_epochs[i - 1], store.root_epochs[i])) {
            throw CanonicalityError("root epochs out of canonical order");
        }
    }
    for (std::size_t i = 1; i < store.peer_keys.size(); ++i) {
        if (!peer_less(store.peer_keys[i - 1], store.peer_keys[i])) {
            throw CanonicalityError("peer keys out of canonical order");
        }
    }
    require_reencode_match(bytes, trust_store_node(store));
    return store;
}

TrustStore load_trust_store(const std::string& path) {
    if (!file_exists(path)) {
        return TrustStore{};
    }
    return decode_trust_store(read_file(path));
}

void save_trust_store(const std::string& path, const TrustStore& store) {
    write_file(path, trust_store_bytes(store));
}

// ---------------------------------------------------------------------------
// Sealing and verification
// ---------------------------------------------------------------------------

namespace {

// Shared by seal_tdo (throwing) and verify_seal (reporting): checks digest
// linkage and issuer signatures, leaf to root.
std::optional<std::string> chain_fault(const std::vector<Certificate>& chain) {
    if (chain.empty()) {
        return "certificate chain is empty";
    }
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        const Certificate& cert = chain[i];
        const Certificate& issuer = chain[i + 1];
        if (!cert.issuer_digest) {
            return "certificate " + std::to_string(i) + " names no issuer";
        }
        if (*cert.issuer_digest != certificate_digest(issuer)) {
            return "broken chain: certificate " + std::to_string(i) +
                   " was not issued by the next certificate";
        }
        if (!verify_signature(issuer.subject_public_key, certificate_signing_bytes(cert),
                              cert.signature)) {
            return "certificate " + std::to_string(i) + " signature does not verify";
        }
    }
    const Certificate& root = chain.back();
    if (root.role != CertRole::root) {
        return "chain does not terminate at a root-role certificate";
    }
    if (root.issuer_digest) {
        return "root certificate names an issuer";
    }
    if (!verify_signature(root.subject_public_key, certificate_signing_bytes(root),
                          root.signature)) {
        return "root certificate self-signature does not verify";
    }
    return std::nullopt;
}

bool covers(const Certificate& cert, Date d) {
    return !(d < cert.valid_from) && !(cert.valid_to < d);
}

} // namespace

TrustworthyDigitalObject seal_tdo(const TrustworthyDigitalObject& tdo, const KeyPair& signer,
                                  const Certificate& signer_cert,
                                  const std::vector<Certificate>& rest_of_chain, Date seal_date) {
    if (tdo.seal) {
        throw StructuralError("object is already sealed");
    }
    if (!seal_date.valid()) {
        throw StructuralError("seal date is not a calendar date");
    }
    auto violations = validate_structure(tdo);
    if (!violations.empty()) {
        std::string msg = "cannot seal a structurally invalid object:";
        for (const Violation& v : violations) {
            msg += " [" + v.field + ": " + v.rule + "]";
        }
        throw StructuralError(msg);
    }
    if (signer_cert.subject_public_key != signer.public_key) {
        throw StructuralError("signer certificate does not belong to the signing key");
    }
    Seal seal;
    seal.chain.push_back(signer_cert);
    seal.chain.insert(seal.chain.end(), rest_of_chain.begin(), rest_of_chain.end());
    seal.seal_date = seal_date;
    seal.signature.algorithm_tag = signer.algorithm_tag;
    if (auto fault = chain_fault(seal.chain)) {
        throw StructuralError(*fault);
    }
    for (std::size_t i = 0; i < seal.chain.size(); ++i) {
        if (!covers(seal.chain[i], seal_date)) {
            throw StructuralError("seal date falls outside the validity of certificate " +
                                  std::to_string(i));
        }
    }
    TrustworthyDigitalObject sealed = tdo;
    sealed.seal = std::move(seal);
    sealed.seal->signature = sign_message(signer, seal_signing_bytes(sealed));
    return sealed;
}

VerificationReport verify_seal(std::span<const std::uint8_t> sealed_bytes,
                               const TrustStore& trust) {
    VerificationReport rep;
    TrustworthyDigitalObject tdo;
    try {
        tdo = decode(sealed_bytes);
    } catch (const ParseError& e) {
        rep.reasons.push_back(std::string("not a well-formed document: ") + e.what());
        return rep;
    } catch (const CanonicalityError& e) {
        rep.reasons.push_back(std::string("not in canonical form: ") + e.what());
        return rep;
    } catch (const Error& e) {
        rep.reasons.push_back(e.what());
        return rep;
    }
    auto violations = validate_structure(tdo);
    if (!violations.empty()) {
        for (const Violation& v : violations) {
            rep.reasons.push_back("structural violation at " + v.field + ": " + v.rule);
        }
        return rep;
    }
    rep.decode_ok = true;
    if (!tdo.seal) {
        rep.reasons.push_back("object carries no seal");
        return rep;
    }
    const Seal& seal = *tdo.seal;

    std::vector<std::uint8_t> preimage;
    try {
        preimage = seal_signing_bytes(tdo);
    } catch (const Error& e) {
        rep.reasons.push_back(e.what());
        return rep;
    }
    rep.signature_ok =
        verify_signature(seal.signer_certificate().subject_public_key, preimage, seal.signature);
    if (!rep.signature_ok) {
        rep.reasons.push_back("seal signature does not verify over the canonical bytes");
    }

    auto fault = chain_fault(seal.chain);
    rep.chain_ok = !fault.has_value();
    if (fault) {
        rep.reasons.push_back(*fault);
    }

    rep.date_ok = true;
    for (std::size_t i = 0; i < seal.chain.size(); ++i) {
        if (!covers(seal.chain[i], seal.seal_date)) {
            rep.date_ok = false;
            rep.reasons.push_back("seal date falls outside the validity of certificate " +
                                  std::to_string(i));
        }
    }

    const PublicKey& root_key = seal.chain.back().subject_public_key;
    const PublicKey& leaf_key = seal.signer_certificate().subject_public_key;
    bool epoch_match = std::any_of(
        trust.root_epochs.begin(), trust.root_epochs.end(), [&](const KeyEpoch& e) {
            return e.year == seal.seal_date.year && e.public_key == root_key;
        });
    bool peer_match = trust.has_peer_key(leaf_key);
    if (epoch_match) {
        rep.grounding_ok = true;
        rep.grounding_path = GroundingPath::epoch;
    } else if (peer_match) {
        rep.grounding_ok = true;
        rep.grounding_path = GroundingPath::peer;
    } else {
        rep.reasons.push_back(
            "chain grounds in no registered root epoch for the seal year and no trusted peer key");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Key files
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kPrivateHeader = "TDO-KEY/1\ned25519\n";
constexpr std::string_view kPublicHeader = "TDO-PUB/1\ned25519\n";

void append(std::vector<std::uint8_t>& out, std::string_view s) {
    out.insert(out.end(), s.begin(), s.end());
}

} // namespace

std::vector<std::uint8_t> private_key_file_bytes(const KeyPair& key) {
    require_ed25519(key.algorithm_tag);
    if (key.private_key.size() != 32 || key.public_key.bytes.size() != 32) {
        throw CryptoError("key material has the wrong length");
    }
    std::vector<std::uint8_t> out;
    append(out, kPrivateHeader);
    out.insert(out.end(), key.private_key.begin(), key.private_key.end());
    out.insert(out.end(), key.public_key.bytes.begin(), key.public_key.bytes.end());
    return out;
}

std::vector<std::uint8_t> public_key_file_bytes(const PublicKey& key) {
    require_ed25519(key.algorithm_tag);
    if (key.bytes.size() != 32) {
        throw CryptoError("key material has the wrong length");
    }
    std::vector<std::uint8_t> out;
    append(out, kPublicHeader);
    out.insert(out.end(), key.bytes.begin(), key.bytes.end());
    return out;
}

KeyPair decode_private_key_file(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kPrivateHeader.size() + 64 ||
        !std::equal(kPrivateHeader.begin(), kPrivateHeader.end(), bytes.begin())) {
        throw CryptoError("not a private key file");
    }
    KeyPair key;
    key.algorithm_tag = std::string(kDefaultSignatureAlgorithm);
    key.private_key.assign(bytes.begin() + kPrivateHeader.size(),
                           bytes.begin() + kPrivateHeader.size() + 32);
    key.public_key.algorithm_tag = key.algorithm_tag;
    key.public_key.bytes.assign(bytes.begin() + kPrivateHeader.size() + 32, bytes.end());
    PkeyPtr pkey = raw_private(key.private_key);
    if (raw_public_bytes(pkey.get()) != key.public_key.bytes) {
        throw CryptoError("key file is inconsistent: stored public key does not match the seed");
    }
    return key;
}

PublicKey decode_public_key_file(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kPublicHeader.size() + 32 ||
        !std::equal(kPublicHeader.begin(), kPublicHeader.end(), bytes.begin())) {
        throw CryptoError("not a public key file");
    }
    PublicKey key;
    key.algorithm_tag = std::string(kDefaultSignatureAlgorithm);
    key.bytes.assign(bytes.begin() + kPublicHeader.size(), bytes.end());
    return key;
}

KeyPair load_private_key(const std::string& path) {
    return decode_private_key_file(read_file(path));
}

PublicKey load_public_key(const std::string& path) {
    return decode_public_key_file(read_file(path));
}

void save_private_key(const std::string& path, const KeyPair& key) {
    write_file(path, private_key_file_bytes(key));
}

void save_public_key(const std::string& path, const PublicKey& key) {
    write_file(path, public_key_file_bytes(key));
}

std::vector<std::uint8_t> certificate_file_bytes(const Certificate& cert) {
    return certificate_bytes(cert);
}

Certificate load_certificate(const std::string& path) {
    return decode_certificate(read_file(path));
}

void save_certificate(const std::string& path, const Certificate& cert) {
    write_file(path, certificate_bytes(cert));
}

} // namespace tdo
