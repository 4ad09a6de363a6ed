#include "tdo/provenance.hpp"

#include <algorithm>
#include <set>

#include "tdo/canonical.hpp"
#include "tdo/errors.hpp"
#include "tdo/fsio.hpp"
#include "tdo/markup.hpp"
#include "tdo/textcodec.hpp"

namespace tdo {

const std::vector<std::string>& builtin_transformation_kinds() {
    static const std::vector<std::string> kinds = {
        "charset-transcode", "excerpt", "format-repackage", "identity-copy",
        "lossless-compress", "lossy-compress", "render",
    };
    return kinds;
}

DerivationStatement make_statement(std::span<const std::uint8_t> source_bytes) {
    Digest d = sha256(source_bytes);
    return DerivationStatement{d, d, {}};
}

namespace {

// One message naming the first internal inconsistency, or nullopt.
std::optional<std::string> statement_fault(const DerivationStatement& s) {
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        if (s.steps[i].index != i + 1) {
            return "step " + std::to_string(i) + " has index " +
                   std::to_string(s.steps[i].index) + ", expected " + std::to_string(i + 1);
        }
        if (i > 0 && s.steps[i - 1].output_digest != s.steps[i].input_digest) {
            return "step " + std::to_string(i) + " input digest does not chain from step " +
                   std::to_string(i - 1);
        }
    }
    if (s.steps.empty()) {
        if (s.source_digest != s.result_digest) {
            return "empty derivation must have equal source and result digests";
        }
    } else {
        if (s.steps.front().input_digest != s.source_digest) {
            return "first step input does not equal the source digest";
        }
        if (s.steps.back().output_digest != s.result_digest) {
            return "last step output does not equal the result digest";
        }
    }
    return std::nullopt;
}

} // namespace

DerivationStatement record_transformation(DerivationStatement statement, std::string kind,
                                          std::span<const std::uint8_t> input_bytes,
                                          std::span<const std::uint8_t> output_bytes,
                                          std::string agent, std::string event, Date timestamp) {
    if (kind.empty() || !utf8_valid(kind) || !attr_value_safe(kind)) {
        throw StructuralError("transformation kind must be plain non-empty text");
    }
    if (!utf8_valid(agent) || !attr_value_safe(agent) || !utf8_valid(event) ||
        !attr_value_safe(event)) {
        throw StructuralError("agent and event must be plain text");
    }
    if (!timestamp.valid()) {
        throw StructuralError("transformation timestamp is not a calendar date");
    }
    Digest input_digest = sha256(input_bytes);
    const Digest& expected =
        statement.steps.empty() ? statement.source_digest : statement.result_digest;
    if (input_digest != expected) {
        throw StructuralError("chain break: input bytes do not digest to the statement's "
                              "current result");
    }
    TransformationRecord rec;
    rec.index = statement.steps.size() + 1;
    rec.kind = std::move(kind);
    rec.input_digest = std::move(input_digest);
    rec.output_digest = sha256(output_bytes);
    rec.agent = std::move(agent);
    rec.event = std::move(event);
    rec.timestamp = timestamp;
    statement.result_digest = rec.output_digest;
    statement.steps.push_back(std::move(rec));
    return statement;
}

bool verify_derivation(const DerivationStatement& statement,
                       std::span<const std::uint8_t> source_bytes,
                       std::span<const std::uint8_t> result_bytes) noexcept {
    if (statement_fault(statement)) {
        return false;
    }
    return sha256(source_bytes) == statement.source_digest &&
           sha256(result_bytes) == statement.result_digest;
}

TrustworthyDigitalObject derive_version(std::span<const std::uint8_t> predecessor_sealed_bytes,
                                        std::vector<ContentBlob> new_payload, DeriveMode mode,
                                        const DerivationStatement& statement,
                                        ProvenanceStatement provenance_statement,
                                        std::vector<MetadataRecord> metadata,
                                        const TrustStore& trust) {
    VerificationReport report = verify_seal(predecessor_sealed_bytes, trust);
    if (!report.accepted()) {
        std::string msg = "predecessor seal does not verify:";
        for (const std::string& r : report.reasons) {
            msg += " [" + r + "]";
        }
        throw StructuralError(msg);
    }
    if (auto fault = statement_fault(statement)) {
        throw StructuralError("derivation statement is inconsistent: " + *fault);
    }
    TrustworthyDigitalObject pred = decode(predecessor_sealed_bytes);

    ExternalReference ref;
    ref.target_kind = RefKind::version;
    ref.target = pred.protection.version_id.value;
    ref.expected_digest = sha256(predecessor_sealed_bytes);
    ref.relation = "predecessor";

    if (mode == DeriveMode::nest) {
        ContentBlob nested;
        nested.name = "predecessor-" + pred.protection.version_id.value;
        nested.media_hint = "application/tdo";
        nested.encoding = BlobEncoding::raw;
        nested.bytes.assign(predecessor_sealed_bytes.begin(), predecessor_sealed_bytes.end());
        new_payload.push_back(std::move(nested));
    }

    TrustworthyDigitalObject out =
        new_tdo(std::move(new_payload), std::move(metadata), std::move(provenance_statement));
    out.protection.work_id.value = pred.protection.work_id.value;
    out.protection.provenance = statement.steps;
    out.protection.predecessors.push_back(std::move(ref));

    auto violations = validate_structure(out);
    if (!violations.empty()) {
        std::string msg = "derived object is structurally invalid:";
        for (const Violation& v : violations) {
            msg += " [" + v.field + ": " + v.rule + "]";
        }
        throw StructuralError(msg);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Genre policy
// ---------------------------------------------------------------------------

namespace {

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

void check_term(const std::string& term, const char* what) {
    if (term.empty() || !utf8_valid(term) || !text_content_safe(term) ||
        term.find('\n') != std::string::npos || term.find('\t') != std::string::npos) {
        throw StructuralError(std::string(what) + " must be plain non-empty single-line text");
    }
}

Node policy_node(const GenrePolicy& p) {
    Node root{"genre-policy"};
    root.set_attr("format", "TDO/1");
    root.set_attr("genre", p.genre);
    Node allowed{"allowed"};
    for (const std::string& kind : p.allowed_kinds) {
        allowed.add_child(Node{"kind"}.set_text(kind));
    }
    root.add_child(std::move(allowed));
    Node required{"required"};
    for (const std::string& key : p.required_metadata) {
        required.add_child(Node{"key"}.set_text(key));
    }
    root.add_child(std::move(required));
    return root;
}

} // namespace

GenrePolicy make_policy(std::string genre, std::vector<std::string> allowed_kinds,
                        std::vector<std::string> required_metadata) {
    if (genre.empty() || !utf8_valid(genre) || !attr_value_safe(genre)) {
        throw StructuralError("policy genre must be plain non-empty text");
    }
    for (const std::string& k : allowed_kinds) {
        check_term(k, "transformation kind");
    }
    for (const std::string& k : required_metadata) {
        check_term(k, "metadata key");
    }
    sort_unique(allowed_kinds);
    sort_unique(required_metadata);
    if (allowed_kinds.empty()) {
        throw StructuralError("a policy must allow at least one transformation kind");
    }
    return GenrePolicy{std::move(genre), std::move(allowed_kinds), std::move(required_metadata)};
}

std::vector<std::uint8_t> policy_bytes(const GenrePolicy& policy) {
    return to_byte_vector(emit_document(policy_node(policy)));
}

GenrePolicy decode_policy(std::span<const std::uint8_t> bytes) {
    Node root = parse_document(bytes);
    if (root.name != "genre-policy" || root.attrs.size() != 2 ||
        root.attr("format") != std::optional<std::string_view>("TDO/1") || !root.attr("genre")) {
        throw CanonicalityError("document element is not <genre-policy format=\"TDO/1\">");
    }
    if (root.children.size() != 2 || root.children[0].name != "allowed" ||
        root.children[1].name != "required") {
        throw CanonicalityError("<genre-policy> must hold <allowed> then <required>");
    }
    GenrePolicy policy;
    policy.genre = std::string(*root.attr("genre"));
    auto read_terms = [](const Node& parent, std::string_view child_name,
                         std::vector<std::string>& out) {
        if (!parent.attrs.empty()) {
            throw CanonicalityError("unexpected attribute on <" + parent.name + ">");
        }
        for (const Node& child : parent.children) {
            if (child.name != child_name || !child.attrs.empty() || !child.children.empty()) {
                throw CanonicalityError("expected <" + std::string(child_name) + "> in <" +
                                        parent.name + ">");
            }
            out.push_back(child.text);
        }
        for (std::size_t i = 1; i < out.size(); ++i) {
            if (out[i] <= out[i - 1]) {
                throw CanonicalityError("<" + parent.name + "> terms out of canonical order");
            }
        }
    };
    read_terms(root.children[0], "kind", policy.allowed_kinds);
    read_terms(root.children[1], "key", policy.required_metadata);
    require_reencode_match(bytes, policy_node(policy));
    return make_policy(std::move(policy.genre), std::move(policy.allowed_kinds),
                       std::move(policy.required_metadata));
}

GenrePolicy load_policy(const std::string& path) {
    return decode_policy(read_file(path));
}

void save_policy(const std::string& path, const GenrePolicy& policy) {
    write_file(path, policy_bytes(policy));
}

// ---------------------------------------------------------------------------
// Authenticity judgment
// ---------------------------------------------------------------------------

AuthenticityVerdict judge_authenticity(std::span<const std::uint8_t> sealed_bytes,
                                       const GenrePolicy& policy, const TrustStore& trust,
                                       const ReferentResolver& resolve) {
    AuthenticityVerdict v;
    VerificationReport report = verify_seal(sealed_bytes, trust);
    v.provenance_ok = report.accepted();
    if (!v.provenance_ok) {
        for (const std::string& r : report.reasons) {
            v.reasons.push_back("provenance: " + r);
        }
    }
    if (!report.decode_ok) {
        v.reasons.push_back("object cannot be decoded; derivation and faithfulness are unjudgeable");
        return v;
    }
    TrustworthyDigitalObject tdo = decode(sealed_bytes);
    const ProtectionBlock& p = tdo.protection;

    v.derivative_ok = true;
    for (std::size_t i = 0; i < p.provenance.size(); ++i) {
        if (p.provenance[i].index != i + 1 ||
            (i > 0 && p.provenance[i - 1].output_digest != p.provenance[i].input_digest)) {
            v.derivative_ok = false;
            v.reasons.push_back("derivation: embedded history breaks at step " +
                                std::to_string(i));
        }
    }
    for (const ExternalReference& ref : p.predecessors) {
        const Digest& want = *ref.expected_digest;
        const ContentBlob* nested = nullptr;
        for (const ContentBlob& blob : tdo.payload) {
            if (blob.name == "predecessor-" + ref.target &&
                blob.media_hint == "application/tdo") {
                nested = &blob;
                break;
            }
        }
        if (nested) {
            if (sha256(nested->bytes) == want) {
                continue;
            }
            v.derivative_ok = false;
            v.reasons.push_back("derivation: nested predecessor blob for " + ref.target +
                                " does not match the expected digest");
            continue;
        }
        auto bytes = resolve ? resolve(ref.target) : std::nullopt;
        if (!bytes) {
            v.derivative_ok = false;
            v.reasons.push_back("derivation: predecessor " + ref.target + " does not resolve");
        } else if (sha256(*bytes) != want) {
            v.derivative_ok = false;
            v.reasons.push_back("derivation: resolved bytes for " + ref.target +
                                " do not match the expected digest");
        }
    }

    v.faithful_ok = true;
    for (const TransformationRecord& rec : p.provenance) {
        if (!std::binary_search(policy.allowed_kinds.begin(), policy.allowed_kinds.end(),
                                rec.kind)) {
            v.faithful_ok = false;
            v.reasons.push_back("faithfulness: transformation kind \"" + rec.kind +
                                "\" is not allowed for genre \"" + policy.genre + "\"");
        }
    }
    std::set<std::string> present;
    for (const MetadataRecord& m : p.metadata) {
        present.insert(m.key);
    }
    for (const std::string& key : policy.required_metadata) {
        if (!present.count(key)) {
            v.faithful_ok = false;
            v.reasons.push_back("faithfulness: required metadata key \"" + key +
                                "\" is missing");
        }
    }

    v.authentic = v.derivative_ok && v.provenance_ok && v.faithful_ok;
    return v;
}

// ---------------------------------------------------------------------------
// History
// ---------------------------------------------------------------------------

std::vector<HistoryHop> trace_history(const TrustworthyDigitalObject& tdo,
                                      const ReferentResolver& resolve) {
    std::vector<HistoryHop> out;
    std::set<std::string> visited;
    out.push_back(HistoryHop{tdo.protection.version_id, true});
    visited.insert(tdo.protection.version_id.value);

    const TrustworthyDigitalObject* current = &tdo;
    TrustworthyDigitalObject fetched;
    while (current && !current->protection.predecessors.empty()) {
        const ExternalReference ref = current->protection.predecessors.front();
        if (!visited.insert(ref.target).second) {
            throw StructuralError("predecessor cycle at " + ref.target);
        }
        auto bytes = resolve ? resolve(ref.target) : std::nullopt;
        if (!bytes) {
            out.push_back(HistoryHop{VersionId{ref.target}, false});
            break;
        }
        bool verified = ref.expected_digest && sha256(*bytes) == *ref.expected_digest;
        out.push_back(HistoryHop{VersionId{ref.target}, verified});
        try {
            fetched = decode(*bytes);
            current = &fetched;
        } catch (const Error&) {
            current = nullptr; // stored bytes unreadable; the id trail ends here
        }
    }
    return out;
}

} // namespace tdo
