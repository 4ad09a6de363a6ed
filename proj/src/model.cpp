#include "tdo/model.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "tdo/canonical.hpp"
#include "tdo/errors.hpp"
#include "tdo/textcodec.hpp"
#include "tdo/vm.hpp"

namespace tdo {

std::string_view to_string(BlobEncoding e) {
    switch (e) {
    case BlobEncoding::raw: return "raw";
    case BlobEncoding::vm_program: return "vm-program";
    case BlobEncoding::vm_encoded: return "vm-encoded";
    }
    return "raw";
}

std::optional<BlobEncoding> blob_encoding_from(std::string_view s) {
    if (s == "raw") return BlobEncoding::raw;
    if (s == "vm-program") return BlobEncoding::vm_program;
    if (s == "vm-encoded") return BlobEncoding::vm_encoded;
    return std::nullopt;
}

std::string_view to_string(RefKind k) {
    return k == RefKind::version ? "version" : "work";
}

std::optional<RefKind> ref_kind_from(std::string_view s) {
    if (s == "version") return RefKind::version;
    if (s == "work") return RefKind::work;
    return std::nullopt;
}

std::string_view to_string(CertRole r) {
    switch (r) {
    case CertRole::root: return "root";
    case CertRole::witness: return "witness";
    case CertRole::editor: return "editor";
    }
    return "editor";
}

std::optional<CertRole> cert_role_from(std::string_view s) {
    if (s == "root") return CertRole::root;
    if (s == "witness") return CertRole::witness;
    if (s == "editor") return CertRole::editor;
    return std::nullopt;
}

bool metadata_canonical_less(const MetadataRecord& a, const MetadataRecord& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    if (a.key != b.key) return a.key < b.key;
    return a.value < b.value;
}

const std::vector<std::string>& builtin_metadata_keys() {
    static const std::vector<std::string> keys = {
        "creator", "date", "description", "genre", "title",
    };
    return keys;
}

VersionId derive_version_id(const std::vector<ContentBlob>& payload) {
    if (payload.empty()) {
        throw StructuralError("payload must contain at least one blob");
    }
    std::set<std::string> names;
    for (const ContentBlob& b : payload) {
        if (!names.insert(b.name).second) {
            throw StructuralError("duplicate blob name \"" + b.name + "\"");
        }
    }
    return VersionId{sha256(payload_block_bytes(payload)).hex()};
}

TrustworthyDigitalObject new_tdo(std::vector<ContentBlob> payload,
                                 std::vector<MetadataRecord> metadata,
                                 ProvenanceStatement provenance_statement) {
    TrustworthyDigitalObject tdo;
    tdo.payload = std::move(payload);
    tdo.protection.version_id = derive_version_id(tdo.payload);
    tdo.protection.work_id.value = tdo.protection.version_id.value;
    std::stable_sort(metadata.begin(), metadata.end(), metadata_canonical_less);
    tdo.protection.metadata = std::move(metadata);
    if (provenance_statement.created.empty()) {
        provenance_statement.created = tdo.protection.version_id.value;
    }
    tdo.protection.provenance_statement = std::move(provenance_statement);
    bool needs_vm = std::any_of(tdo.payload.begin(), tdo.payload.end(), [](const ContentBlob& b) {
        return b.encoding != BlobEncoding::raw;
    });
    if (needs_vm) {
        tdo.protection.vm_spec_ref = vm_spec_digest();
    }
    auto violations = validate_structure(tdo);
    if (!violations.empty()) {
        std::string msg = "invalid inputs:";
        for (const Violation& v : violations) {
            msg += " [" + v.field + ": " + v.rule + "]";
        }
        throw StructuralError(msg);
    }
    return tdo;
}

namespace {

class Checker {
public:
    std::vector<Violation> out;

    void flag(std::string field, std::string rule) {
        out.push_back(Violation{std::move(field), std::move(rule)});
    }

    // Strings that end up in attribute values or element text must survive
    // canonical encoding; anything else makes the object unencodable.
    void attr_text(const std::string& field, const std::string& value) {
        if (!utf8_valid(value) || !attr_value_safe(value)) {
            flag(field, "must be UTF-8 without control characters");
        }
    }

    void element_text(const std::string& field, const std::string& value) {
        if (!utf8_valid(value) || !text_content_safe(value)) {
            flag(field, "must be UTF-8 without control characters other than tab and newline");
        }
    }

    void nonempty(const std::string& field, const std::string& value) {
        if (value.empty()) {
            flag(field, "must not be empty");
        }
    }

    void digest(const std::string& field, const Digest& d) {
        auto len = digest_length(d.algorithm_tag);
        if (!len) {
            flag(field, "unregistered digest algorithm tag");
        } else if (d.bytes.size() != *len) {
            flag(field, "digest length does not match its algorithm");
        }
    }

    void id_hex(const std::string& field, const std::string& value) {
        bool ok = value.size() == 2 * *digest_length(kDefaultDigestAlgorithm);
        for (char c : value) {
            ok = ok && ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'));
        }
        if (!ok) {
            flag(field, "must be a lowercase hex object identifier");
        }
    }

    void date(const std::string& field, const Date& d) {
        if (!d.valid()) {
            flag(field, "not a valid calendar date");
        }
    }

    void public_key(const std::string& field, const PublicKey& k) {
        if (k.algorithm_tag != "ed25519") {
            flag(field + ".algorithm_tag", "unregistered key algorithm tag");
        } else if (k.bytes.size() != 32) {
            flag(field + ".bytes", "key length does not match its algorithm");
        }
    }

    void signature(const std::string& field, const SignatureValue& s) {
        if (s.algorithm_tag != "ed25519") {
            flag(field + ".algorithm_tag", "unregistered signature algorithm tag");
        } else if (s.bytes.size() != 64) {
            flag(field + ".bytes", "signature length does not match its algorithm");
        }
    }

    void reference(const std::string& field, const ExternalReference& r) {
        id_hex(field + ".target", r.target);
        attr_text(field + ".relation", r.relation);
        if (!r.expected_digest) {
            flag(field + ".expected_digest", "reference must carry the referent's digest");
        } else {
            digest(field + ".expected_digest", *r.expected_digest);
        }
    }

    void certificate(const std::string& field, const Certificate& c) {
        public_key(field + ".subject_public_key", c.subject_public_key);
        nonempty(field + ".subject_name", c.subject_name);
        attr_text(field + ".subject_name", c.subject_name);
        date(field + ".valid_from", c.valid_from);
        date(field + ".valid_to", c.valid_to);
        if (c.valid_to < c.valid_from) {
            flag(field, "validity interval is empty");
        }
        if (c.role == CertRole::root) {
            if (c.issuer_digest) {
                flag(field + ".issuer_digest", "root certificate is self-attested and names no issuer");
            }
        } else {
            if (!c.issuer_digest) {
                flag(field + ".issuer_digest", "non-root certificate must name its issuer");
            } else {
                digest(field + ".issuer_digest", *c.issuer_digest);
            }
        }
        signature(field + ".signature", c.signature);
    }
};

} // namespace

std::vector<Violation> validate_structure(const TrustworthyDigitalObject& tdo) {
    Checker ck;

    // Payload.
    if (tdo.payload.empty()) {
        ck.flag("payload", "must contain at least one blob");
    }
    std::set<std::string> names;
    bool any_non_raw = false;
    for (std::size_t i = 0; i < tdo.payload.size(); ++i) {
        const ContentBlob& b = tdo.payload[i];
        const std::string field = "payload[" + std::to_string(i) + "]";
        ck.nonempty(field + ".name", b.name);
        ck.attr_text(field + ".name", b.name);
        ck.attr_text(field + ".media_hint", b.media_hint);
        if (!names.insert(b.name).second) {
            ck.flag(field + ".name", "duplicate blob name");
        }
        if (b.encoding != BlobEncoding::raw) {
            any_non_raw = true;
        }
        if (b.encoding == BlobEncoding::vm_encoded && !b.decoder_ref) {
            ck.flag(field + ".decoder_ref", "vm-encoded blob must name its decoding program");
        }
        if (b.decoder_ref) {
            ck.digest(field + ".decoder_ref", *b.decoder_ref);
        }
    }

    // Identifiers.
    const ProtectionBlock& p = tdo.protection;
    ck.id_hex("protection.version_id", p.version_id.value);
    ck.id_hex("protection.work_id", p.work_id.value);
    if (!tdo.payload.empty() && names.size() == tdo.payload.size()) {
        try {
            if (derive_version_id(tdo.payload).value != p.version_id.value) {
                ck.flag("protection.version_id", "does not match the payload digest");
            }
        } catch (const Error&) {
            // Unencodable payload; the field checks above already name the cause.
        }
    }
    if (p.predecessors.empty() && p.work_id.value != p.version_id.value) {
        ck.flag("protection.work_id", "first version must have work_id equal to version_id");
    }
    if (!p.predecessors.empty() && p.work_id.value == p.version_id.value) {
        ck.flag("protection.predecessors", "a version identical to the work origin cannot have predecessors");
    }

    // Provenance statement.
    ck.nonempty("protection.provenance_statement.creator", p.provenance_statement.creator);
    ck.nonempty("protection.provenance_statement.created", p.provenance_statement.created);
    ck.nonempty("protection.provenance_statement.event", p.provenance_statement.event);
    ck.attr_text("protection.provenance_statement.creator", p.provenance_statement.creator);
    ck.attr_text("protection.provenance_statement.created", p.provenance_statement.created);
    ck.attr_text("protection.provenance_statement.event", p.provenance_statement.event);

    // Transformation history.
    for (std::size_t i = 0; i < p.provenance.size(); ++i) {
        const TransformationRecord& s = p.provenance[i];
        const std::string field = "protection.provenance[" + std::to_string(i) + "]";
        if (s.index != i + 1) {
            ck.flag(field + ".index", "indices must count from 1 without gaps");
        }
        ck.nonempty(field + ".kind", s.kind);
        ck.attr_text(field + ".kind", s.kind);
        ck.attr_text(field + ".agent", s.agent);
        ck.attr_text(field + ".event", s.event);
        ck.digest(field + ".input_digest", s.input_digest);
        ck.digest(field + ".output_digest", s.output_digest);
        ck.date(field + ".timestamp", s.timestamp);
        if (i > 0 && p.provenance[i - 1].output_digest != s.input_digest) {
            ck.flag(field + ".input_digest", "must equal the previous record's output digest");
        }
    }

    // References.
    for (std::size_t i = 0; i < p.predecessors.size(); ++i) {
        ck.reference("protection.predecessors[" + std::to_string(i) + "]", p.predecessors[i]);
    }
    for (std::size_t i = 0; i < p.links.size(); ++i) {
        ck.reference("protection.links[" + std::to_string(i) + "]", p.links[i]);
    }

    // Metadata.
    for (std::size_t i = 0; i < p.metadata.size(); ++i) {
        const MetadataRecord& m = p.metadata[i];
        const std::string field = "protection.metadata[" + std::to_string(i) + "]";
        ck.nonempty(field + ".key", m.key);
        ck.attr_text(field + ".key", m.key);
        ck.attr_text(field + ".scheme", m.scheme);
        ck.element_text(field + ".value", m.value);
        if (m.scheme.empty()) {
            const auto& builtin = builtin_metadata_keys();
            if (std::find(builtin.begin(), builtin.end(), m.key) == builtin.end()) {
                ck.flag(field + ".key", "unschemed keys must come from the built-in set");
            }
        }
        if (i > 0 && metadata_canonical_less(m, p.metadata[i - 1])) {
            ck.flag(field, "metadata records must be in canonical order");
        }
    }

    // Decoder support.
    if (any_non_raw && !p.vm_spec_ref) {
        ck.flag("protection.vm_spec_ref", "required whenever any blob is not raw");
    }
    if (p.vm_spec_ref) {
        ck.digest("protection.vm_spec_ref", *p.vm_spec_ref);
    }

    // Seal.
    if (tdo.seal) {
        const Seal& seal = *tdo.seal;
        ck.date("seal.seal_date", seal.seal_date);
        if (seal.chain.empty()) {
            ck.flag("seal.chain", "must contain at least the signer certificate");
        } else if (seal.chain.back().role != CertRole::root) {
            ck.flag("seal.chain", "must terminate at a root-role certificate");
        }
        for (std::size_t i = 0; i < seal.chain.size(); ++i) {
            ck.certificate("seal.chain[" + std::to_string(i) + "]", seal.chain[i]);
        }
        ck.signature("seal.signature", seal.signature);
    }

    return ck.out;
}

} // namespace tdo
