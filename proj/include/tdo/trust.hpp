#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdo/model.hpp"

namespace tdo {

inline constexpr std::string_view kDefaultSignatureAlgorithm = "ed25519";

// Signing key material. private_key is the 32-byte seed; it never appears in
// any serialized object.
struct KeyPair {
    std::string algorithm_tag;
    PublicKey public_key;
    std::vector<std::uint8_t> private_key;
};

KeyPair generate_keypair(std::string_view algorithm_tag = kDefaultSignatureAlgorithm);

SignatureValue sign_message(const KeyPair& key, std::span<const std::uint8_t> message);

// True iff `signature` is a valid signature of `message` under `key`. Returns
// false (never throws) for wrong algorithm tags or malformed lengths.
bool verify_signature(const PublicKey& key, std::span<const std::uint8_t> message,
                      const SignatureValue& signature);

// Digest of the full canonical certificate document, signature included. This
// is the value non-root certificates store as issuer_digest.
Digest certificate_digest(const Certificate& cert);

// Sign a certificate for subject_public_key. Self-attested root when
// issuer_cert is absent (then role must be root, and the issuer signs its own
// key); otherwise issuer_cert must belong to `issuer` and the new certificate
// records its digest.
Certificate issue_certificate(const KeyPair& issuer,
                              const std::optional<Certificate>& issuer_cert,
                              const PublicKey& subject_public_key,
                              const std::string& subject_name, CertRole role,
                              Date valid_from, Date valid_to);

// ---------------------------------------------------------------------------
// Trust store
// ---------------------------------------------------------------------------

struct PeerKey {
    std::string name;
    PublicKey public_key;

    bool operator==(const PeerKey&) const = default;
};

// The verifier's local ground truth: institutional keys by calendar year plus
// directly exchanged peer keys. A value; updates return new stores.
struct TrustStore {
    std::vector<KeyEpoch> root_epochs; // sorted by (institution, year)
    std::vector<PeerKey> peer_keys;    // sorted by name

    bool operator==(const TrustStore&) const = default;

    const KeyEpoch* find_epoch(std::string_view institution, int year) const;
    const PeerKey* find_peer(std::string_view name) const;
    bool has_peer_key(const PublicKey& key) const;
};

TrustStore register_root_epoch(TrustStore store, std::string institution, int year,
                               PublicKey public_key);

TrustStore add_peer_key(TrustStore store, std::string name, PublicKey public_key);

std::vector<std::uint8_t> trust_store_bytes(const TrustStore& store);
TrustStore decode_trust_store(std::span<const std::uint8_t> bytes);

TrustStore load_trust_store(const std::string& path); // missing file -> empty store
void save_trust_store(const std::string& path, const TrustStore& store);

// ---------------------------------------------------------------------------
// Sealing and verification
// ---------------------------------------------------------------------------

// Attach a seal: the signer's certificate plus the rest of its chain up to a
// root, and a signature over the canonical bytes with the signature field
// empty. Throws if the object is already sealed or structurally invalid, if
// the chain is broken, or if seal_date falls outside any certificate's
// validity.
TrustworthyDigitalObject seal_tdo(const TrustworthyDigitalObject& tdo, const KeyPair& signer,
                                  const Certificate& signer_cert,
                                  const std::vector<Certificate>& rest_of_chain, Date seal_date);

enum class GroundingPath { none, epoch, peer };

struct VerificationReport {
    bool decode_ok = false;
    bool signature_ok = false;
    bool chain_ok = false;
    bool grounding_ok = false;
    bool date_ok = false;
    GroundingPath grounding_path = GroundingPath::none;
    std::vector<std::string> reasons;

    bool accepted() const {
        return decode_ok && signature_ok && chain_ok && grounding_ok && date_ok;
    }
};

// Offline verification of sealed canonical bytes against local trust. Never
// throws; every failure is a report field with a reason.
VerificationReport verify_seal(std::span<const std::uint8_t> sealed_bytes,
                               const TrustStore& trust);

// ---------------------------------------------------------------------------
// Key files
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> private_key_file_bytes(const KeyPair& key);
std::vector<std::uint8_t> public_key_file_bytes(const PublicKey& key);
KeyPair decode_private_key_file(std::span<const std::uint8_t> bytes);
PublicKey decode_public_key_file(std::span<const std::uint8_t> bytes);

KeyPair load_private_key(const std::string& path);
PublicKey load_public_key(const std::string& path);
void save_private_key(const std::string& path, const KeyPair& key);
void save_public_key(const std::string& path, const PublicKey& key);

std::vector<std::uint8_t> certificate_file_bytes(const Certificate& cert);
Certificate load_certificate(const std::string& path);
void save_certificate(const std::string& path, const Certificate& cert);

} // namespace tdo
