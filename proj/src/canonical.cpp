#include "tdo/canonical.hpp"

#include <algorithm>
#include <charconv>

#include "tdo/errors.hpp"
#include "tdo/textcodec.hpp"

namespace tdo {

namespace {

// --- node builders ---------------------------------------------------------

Node digest_node(const char* element, const Digest& d) {
    Node n{element};
    n.set_attr("algorithm", d.algorithm_tag);
    n.set_text(hex_encode(d.bytes));
    return n;
}

Node blob_node(const ContentBlob& blob) {
    Node n{"blob"};
    n.set_attr("encoding", std::string(to_string(blob.encoding)));
    n.set_attr("media", blob.media_hint);
    n.set_attr("name", blob.name);
    Node data{"data"};
    data.set_text(base64_encode(blob.bytes));
    n.add_child(std::move(data));
    if (blob.decoder_ref) {
        n.add_child(digest_node("decoder", *blob.decoder_ref));
    }
    return n;
}

Node payload_node(const std::vector<ContentBlob>& payload) {
    Node n{"payload"};
    for (const ContentBlob& b : payload) {
        n.add_child(blob_node(b));
    }
    return n;
}

Node step_node(const TransformationRecord& step) {
    Node n{"step"};
    n.set_attr("agent", step.agent);
    n.set_attr("event", step.event);
    n.set_attr("index", std::to_string(step.index));
    n.set_attr("kind", step.kind);
    n.set_attr("timestamp", step.timestamp.to_string());
    n.add_child(digest_node("input", step.input_digest));
    n.add_child(digest_node("output", step.output_digest));
    return n;
}

Node ref_node(const ExternalReference& ref) {
    Node n{"ref"};
    n.set_attr("kind", std::string(to_string(ref.target_kind)));
    n.set_attr("relation", ref.relation);
    n.set_attr("target", ref.target);
    if (ref.expected_digest) {
        n.add_child(digest_node("digest", *ref.expected_digest));
    }
    return n;
}

Node protection_node(const ProtectionBlock& p) {
    Node n{"protection"};
    n.add_child(Node{"version"}.set_text(p.version_id.value));
    n.add_child(Node{"work"}.set_text(p.work_id.value));
    Node stmt{"statement"};
    stmt.set_attr("created", p.provenance_statement.created);
    stmt.set_attr("creator", p.provenance_statement.creator);
    stmt.set_attr("event", p.provenance_statement.event);
    n.add_child(std::move(stmt));
    Node prov{"provenance"};
    for (const TransformationRecord& s : p.provenance) {
        prov.add_child(step_node(s));
    }
    n.add_child(std::move(prov));
    Node preds{"predecessors"};
    for (const ExternalReference& r : p.predecessors) {
        preds.add_child(ref_node(r));
    }
    n.add_child(std::move(preds));
    Node links{"links"};
    for (const ExternalReference& r : p.links) {
        links.add_child(ref_node(r));
    }
    n.add_child(std::move(links));
    Node meta{"metadata"};
    for (const MetadataRecord& m : p.metadata) {
        Node rec{"record"};
        rec.set_attr("key", m.key);
        rec.set_attr("scheme", m.scheme);
        rec.set_text(m.value);
        meta.add_child(std::move(rec));
    }
    n.add_child(std::move(meta));
    if (p.vm_spec_ref) {
        n.add_child(digest_node("vmspec", *p.vm_spec_ref));
    }
    return n;
}

Node signature_node(const SignatureValue& sig) {
    Node n{"signature"};
    n.set_attr("algorithm", sig.algorithm_tag);
    n.set_text(base64_encode(sig.bytes));
    return n;
}

Node seal_node(const Seal& seal, bool with_signature) {
    Node n{"seal"};
    n.set_attr("date", seal.seal_date.to_string());
    Node chain{"chain"};
    for (const Certificate& c : seal.chain) {
        chain.add_child(certificate_node(c, true));
    }
    n.add_child(std::move(chain));
    if (with_signature) {
        n.add_child(signature_node(seal.signature));
    } else {
        n.add_child(signature_node(SignatureValue{seal.signature.algorithm_tag, {}}));
    }
    return n;
}

Node tdo_node(const TrustworthyDigitalObject& tdo, bool with_seal_signature) {
    Node n{"tdo"};
    n.set_attr("format", "TDO/1");
    n.add_child(payload_node(tdo.payload));
    n.add_child(protection_node(tdo.protection));
    if (tdo.seal) {
        n.add_child(seal_node(*tdo.seal, with_seal_signature));
    }
    return n;
}

// --- strict mapping back ---------------------------------------------------

[[noreturn]] void refuse(const std::string& msg) {
    throw CanonicalityError(msg);
}

// Sequential reader over an element's children; the fixed schema order makes
// decoding a straight walk.
class ChildCursor {
public:
    explicit ChildCursor(const Node& node) : node_(node) {}

    const Node& require(std::string_view name) {
        if (i_ >= node_.children.size() || node_.children[i_].name != name) {
            refuse("expected <" + std::string(name) + "> in <" + node_.name + ">");
        }
        return node_.children[i_++];
    }

    const Node* optional(std::string_view name) {
        if (i_ < node_.children.size() && node_.children[i_].name == name) {
            return &node_.children[i_++];
        }
        return nullptr;
    }

    bool peek(std::string_view name) const {
        return i_ < node_.children.size() && node_.children[i_].name == name;
    }

    void done() {
        if (i_ != node_.children.size()) {
            refuse("unexpected <" + node_.children[i_].name + "> in <" + node_.name + ">");
        }
    }

private:
    const Node& node_;
    std::size_t i_ = 0;
};

std::string require_attr(const Node& node, std::string_view name) {
    auto v = node.attr(name);
    if (!v) {
        refuse("missing attribute \"" + std::string(name) + "\" on <" + node.name + ">");
    }
    return std::string(*v);
}

void expect_attr_count(const Node& node, std::size_t count) {
    if (node.attrs.size() != count) {
        refuse("unexpected attribute on <" + node.name + ">");
    }
}

void expect_leaf(const Node& node) {
    if (!node.children.empty()) {
        refuse("<" + node.name + "> may not contain elements");
    }
}

Date read_date(const Node& node, std::string_view attr) {
    auto d = Date::parse(require_attr(node, attr));
    if (!d) {
        refuse("bad date in attribute \"" + std::string(attr) + "\" on <" + node.name + ">");
    }
    return *d;
}

std::uint64_t read_u64(const std::string& text, const char* what) {
    if (text.empty() || (text.size() > 1 && text[0] == '0')) {
        refuse(std::string(what) + " is not a minimal decimal integer");
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        refuse(std::string(what) + " is not a minimal decimal integer");
    }
    return value;
}

Digest read_digest(const Node& node) {
    expect_attr_count(node, 1);
    expect_leaf(node);
    std::string tag = require_attr(node, "algorithm");
    auto bytes = hex_decode(node.text);
    if (!bytes) {
        refuse("<" + node.name + "> does not hold lowercase hex");
    }
    return Digest{std::move(tag), std::move(*bytes)};
}

std::vector<std::uint8_t> read_base64(const Node& node) {
    expect_leaf(node);
    auto bytes = base64_decode(node.text);
    if (!bytes) {
        refuse("<" + node.name + "> does not hold canonical base64");
    }
    return *bytes;
}

ContentBlob read_blob(const Node& node) {
    expect_attr_count(node, 3);
    ContentBlob blob;
    auto enc = blob_encoding_from(require_attr(node, "encoding"));
    if (!enc) {
        refuse("unknown blob encoding");
    }
    blob.encoding = *enc;
    blob.media_hint = require_attr(node, "media");
    blob.name = require_attr(node, "name");
    ChildCursor cur(node);
    const Node& data = cur.require("data");
    expect_attr_count(data, 0);
    blob.bytes = read_base64(data);
    if (const Node* dec = cur.optional("decoder")) {
        blob.decoder_ref = read_digest(*dec);
    }
    cur.done();
    return blob;
}

TransformationRecord read_step(const Node& node) {
    expect_attr_count(node, 5);
    TransformationRecord step;
    step.agent = require_attr(node, "agent");
    step.event = require_attr(node, "event");
    step.index = read_u64(require_attr(node, "index"), "step index");
    step.kind = require_attr(node, "kind");
    step.timestamp = read_date(node, "timestamp");
    ChildCursor cur(node);
    step.input_digest = read_digest(cur.require("input"));
    step.output_digest = read_digest(cur.require("output"));
    cur.done();
    return step;
}

ExternalReference read_ref(const Node& node) {
    expect_attr_count(node, 3);
    ExternalReference ref;
    auto kind = ref_kind_from(require_attr(node, "kind"));
    if (!kind) {
        refuse("unknown reference kind");
    }
    ref.target_kind = *kind;
    ref.relation = require_attr(node, "relation");
    ref.target = require_attr(node, "target");
    ChildCursor cur(node);
    if (const Node* d = cur.optional("digest")) {
        ref.expected_digest = read_digest(*d);
    }
    cur.done();
    return ref;
}

ProtectionBlock read_protection(const Node& node) {
    expect_attr_count(node, 0);
    ProtectionBlock p;
    ChildCursor cur(node);
    const Node& version = cur.require("version");
    expect_attr_count(version, 0);
    expect_leaf(version);
    p.version_id.value = version.text;
    const Node& work = cur.require("work");
    expect_attr_count(work, 0);
    expect_leaf(work);
    p.work_id.value = work.text;
    const Node& stmt = cur.require("statement");
    expect_attr_count(stmt, 3);
    expect_leaf(stmt);
    if (!stmt.text.empty()) {
        refuse("<statement> carries no text");
    }
    p.provenance_statement.created = require_attr(stmt, "created");
    p.provenance_statement.creator = require_attr(stmt, "creator");
    p.provenance_statement.event = require_attr(stmt, "event");
    const Node& prov = cur.require("provenance");
    expect_attr_count(prov, 0);
    for (const Node& child : prov.children) {
        if (child.name != "step") {
            refuse("unexpected <" + child.name + "> in <provenance>");
        }
        p.provenance.push_back(read_step(child));
    }
    const Node& preds = cur.require("predecessors");
    expect_attr_count(preds, 0);
    for (const Node& child : preds.children) {
        if (child.name != "ref") {
            refuse("unexpected <" + child.name + "> in <predecessors>");
        }
        p.predecessors.push_back(read_ref(child));
    }
    const Node& links = cur.require("links");
    expect_attr_count(links, 0);
    for (const Node& child : links.children) {
        if (child.name != "ref") {
            refuse("unexpected <" + child.name + "> in <links>");
        }
        p.links.push_back(read_ref(child));
    }
    const Node& meta = cur.require("metadata");
    expect_attr_count(meta, 0);
    for (const Node& child : meta.children) {
        if (child.name != "record") {
            refuse("unexpected <" + child.name + "> in <metadata>");
        }
        expect_attr_count(child, 2);
        expect_leaf(child);
        MetadataRecord rec;
        rec.key = require_attr(child, "key");
        rec.scheme = require_attr(child, "scheme");
        rec.value = child.text;
        p.metadata.push_back(std::move(rec));
    }
    if (const Node* vmspec = cur.optional("vmspec")) {
        p.vm_spec_ref = read_digest(*vmspec);
    }
    cur.done();
    return p;
}

SignatureValue read_signature(const Node& node) {
    expect_attr_count(node, 1);
    SignatureValue sig;
    sig.algorithm_tag = require_attr(node, "algorithm");
    sig.bytes = read_base64(node);
    return sig;
}

Seal read_seal(const Node& node) {
    expect_attr_count(node, 1);
    Seal seal;
    seal.seal_date = read_date(node, "date");
    ChildCursor cur(node);
    const Node& chain = cur.require("chain");
    expect_attr_count(chain, 0);
    for (const Node& child : chain.children) {
        if (child.name != "certificate") {
            refuse("unexpected <" + child.name + "> in <chain>");
        }
        seal.chain.push_back(certificate_from_node(child));
    }
    seal.signature = read_signature(cur.require("signature"));
    cur.done();
    return seal;
}

TrustworthyDigitalObject read_tdo(const Node& root) {
    if (root.name != "tdo") {
        refuse("document element is not <tdo>");
    }
    expect_attr_count(root, 1);
    if (require_attr(root, "format") != "TDO/1") {
        refuse("unsupported format version");
    }
    TrustworthyDigitalObject tdo;
    ChildCursor cur(root);
    const Node& payload = cur.require("payload");
    expect_attr_count(payload, 0);
    for (const Node& child : payload.children) {
        if (child.name != "blob") {
            refuse("unexpected <" + child.name + "> in <payload>");
        }
        tdo.payload.push_back(read_blob(child));
    }
    tdo.protection = read_protection(cur.require("protection"));
    if (const Node* seal = cur.optional("seal")) {
        tdo.seal = read_seal(*seal);
    }
    cur.done();
    return tdo;
}

} // namespace

Node certificate_node(const Certificate& cert, bool with_signature) {
    Node n{"certificate"};
    n.set_attr("role", std::string(to_string(cert.role)));
    n.set_attr("subject", cert.subject_name);
    n.set_attr("valid-from", cert.valid_from.to_string());
    n.set_attr("valid-to", cert.valid_to.to_string());
    Node key{"key"};
    key.set_attr("algorithm", cert.subject_public_key.algorithm_tag);
    key.set_text(base64_encode(cert.subject_public_key.bytes));
    n.add_child(std::move(key));
    if (cert.issuer_digest) {
        n.add_child(digest_node("issuer", *cert.issuer_digest));
    }
    if (with_signature) {
        n.add_child(signature_node(cert.signature));
    }
    return n;
}

Certificate certificate_from_node(const Node& node) {
    if (node.name != "certificate") {
        refuse("expected <certificate>");
    }
    expect_attr_count(node, 4);
    Certificate cert;
    auto role = cert_role_from(require_attr(node, "role"));
    if (!role) {
        refuse("unknown certificate role");
    }
    cert.role = *role;
    cert.subject_name = require_attr(node, "subject");
    cert.valid_from = read_date(node, "valid-from");
    cert.valid_to = read_date(node, "valid-to");
    ChildCursor cur(node);
    const Node& key = cur.require("key");
    expect_attr_count(key, 1);
    cert.subject_public_key.algorithm_tag = require_attr(key, "algorithm");
    cert.subject_public_key.bytes = read_base64(key);
    if (const Node* issuer = cur.optional("issuer")) {
        cert.issuer_digest = read_digest(*issuer);
    }
    cert.signature = read_signature(cur.require("signature"));
    cur.done();
    return cert;
}

std::vector<std::uint8_t> payload_block_bytes(const std::vector<ContentBlob>& payload) {
    return to_byte_vector(emit_document(payload_node(payload)));
}

std::vector<std::uint8_t> encode_unchecked(const TrustworthyDigitalObject& tdo) {
    return to_byte_vector(emit_document(tdo_node(tdo, true)));
}

std::vector<std::uint8_t> seal_signing_bytes(const TrustworthyDigitalObject& tdo) {
    if (!tdo.seal) {
        throw StructuralError("object has no seal to sign over");
    }
    return to_byte_vector(emit_document(tdo_node(tdo, false)));
}

CanonicalDocument encode(const TrustworthyDigitalObject& tdo) {
    auto violations = validate_structure(tdo);
    if (!violations.empty()) {
        std::string msg = "encode refused, object is structurally invalid:";
        for (const Violation& v : violations) {
            msg += " [" + v.field + ": " + v.rule + "]";
        }
        throw StructuralError(msg);
    }
    return CanonicalDocument{encode_unchecked(tdo)};
}

TrustworthyDigitalObject decode(std::span<const std::uint8_t> bytes) {
    Node root = parse_document(bytes); // throws ParseError when malformed
    TrustworthyDigitalObject tdo = read_tdo(root);
    std::vector<std::uint8_t> re = encode_unchecked(tdo);
    if (re.size() != bytes.size() || !std::equal(re.begin(), re.end(), bytes.begin())) {
        refuse("document is well-formed but not in canonical form");
    }
    return tdo;
}

Digest canonical_digest(std::span<const std::uint8_t> bytes) {
    return sha256(bytes);
}

std::vector<std::uint8_t> certificate_bytes(const Certificate& cert) {
    return to_byte_vector(emit_document(certificate_node(cert, true)));
}

std::vector<std::uint8_t> certificate_signing_bytes(const Certificate& cert) {
    return to_byte_vector(emit_document(certificate_node(cert, false)));
}

Certificate decode_certificate(std::span<const std::uint8_t> bytes) {
    Node root = parse_document(bytes);
    Certificate cert = certificate_from_node(root);
    require_reencode_match(bytes, certificate_node(cert, true));
    return cert;
}

void require_reencode_match(std::span<const std::uint8_t> original, const Node& mapped) {
    std::string re = emit_document(mapped);
    if (re.size() != original.size() ||
        !std::equal(re.begin(), re.end(), original.begin(),
                    [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
        refuse("document is well-formed but not in canonical form");
    }
}

} // namespace tdo
