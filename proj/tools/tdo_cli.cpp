// tdo: construct, seal, verify, derive, and curate trustworthy digital
// objects from the command line. Every subcommand is a thin binding of one
// library operation; verdicts map to exit codes (0 accept, 1 reject, 2 usage,
// 3 I/O or structural failure).

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdo/canonical.hpp"
#include "tdo/date.hpp"
#include "tdo/digest.hpp"
#include "tdo/errors.hpp"
#include "tdo/fsio.hpp"
#include "tdo/markup.hpp"
#include "tdo/model.hpp"
#include "tdo/provenance.hpp"
#include "tdo/repository.hpp"
#include "tdo/textcodec.hpp"
#include "tdo/trust.hpp"
#include "tdo/vm.hpp"

namespace {

using namespace tdo;

constexpr std::uint64_t kDefaultFuel = 1'000'000;
constexpr const char* kRepoEnvVar = "TDO_REPO";

struct UsageFailure {
    std::string message;
};

std::vector<std::uint8_t> read_input(const std::string& path) {
    if (path == "-") {
        std::vector<std::uint8_t> bytes;
        char c;
        while (std::cin.get(c)) bytes.push_back(static_cast<std::uint8_t>(c));
        return bytes;
    }
    return read_file(path);
}

void write_output(const std::string& path, std::span<const std::uint8_t> bytes) {
    if (path == "-") {
        std::cout.write(reinterpret_cast<const char*>(bytes.data()),
                        static_cast<std::streamsize>(bytes.size()));
        std::cout.flush();
        return;
    }
    write_file(path, bytes);
}

std::string text_of(std::span<const std::uint8_t> bytes) {
    return std::string(bytes.begin(), bytes.end());
}

Date need_date(const std::string& text, const char* flag) {
    auto d = Date::parse(text);
    if (!d || !d->valid()) throw UsageFailure{std::string(flag) + " needs a valid YYYY-MM-DD date"};
    return *d;
}

std::pair<std::string, std::string> split_eq(const std::string& s, const char* what) {
    auto pos = s.find('=');
    if (pos == std::string::npos || pos == 0)
        throw UsageFailure{std::string(what) + " expects name=value, got '" + s + "'"};
    return {s.substr(0, pos), s.substr(pos + 1)};
}

const char* pass_fail(bool ok) { return ok ? "pass" : "fail"; }

const char* grounding_name(GroundingPath p) {
    switch (p) {
        case GroundingPath::epoch: return "epoch";
        case GroundingPath::peer: return "peer";
        case GroundingPath::none: return "none";
    }
    return "none";
}

// ---------------------------------------------------------------------------
// Shared payload flags (pack, derive)
// ---------------------------------------------------------------------------

struct PayloadFlags {
    std::vector<std::string> blobs;       // name=path
    std::vector<std::string> media;       // name=media-type
    std::vector<std::string> vm_programs; // blob names
    std::vector<std::string> encoded;     // name=decoder-blob-name
    std::vector<std::string> metadata;    // [scheme:]key=value
    std::string creator;
    std::string event;
};

void add_payload_flags(CLI::App* sub, PayloadFlags& f) {
    sub->add_option("--blob", f.blobs, "payload blob as name=path")->required();
    sub->add_option("--media", f.media, "media type override as name=type");
    sub->add_option("--vm-program", f.vm_programs, "blob holding an executable program");
    sub->add_option("--encoded", f.encoded,
                    "durably encoded blob as name=decoder-blob-name");
    sub->add_option("--meta", f.metadata, "metadata record as [scheme:]key=value");
    sub->add_option("--creator", f.creator, "agent that created this version")->required();
    sub->add_option("--event", f.event, "event the creation was part of")->required();
}

std::vector<ContentBlob> build_payload(const PayloadFlags& f) {
    std::map<std::string, std::string> media;
    for (const auto& m : f.media) {
        auto [name, type] = split_eq(m, "--media");
        media[name] = type;
    }
    std::set<std::string> programs(f.vm_programs.begin(), f.vm_programs.end());
    std::map<std::string, std::string> decoders;
    for (const auto& e : f.encoded) {
        auto [name, decoder] = split_eq(e, "--encoded");
        decoders[name] = decoder;
    }

    std::vector<ContentBlob> payload;
    for (const auto& spec : f.blobs) {
        auto [name, path] = split_eq(spec, "--blob");
        ContentBlob blob;
        blob.name = name;
        blob.bytes = read_input(path);
        if (programs.count(name)) {
            blob.encoding = BlobEncoding::vm_program;
            blob.media_hint = "application/devm";
        } else if (decoders.count(name)) {
            blob.encoding = BlobEncoding::vm_encoded;
        }
        if (auto it = media.find(name); it != media.end()) blob.media_hint = it->second;
        if (blob.media_hint.empty()) blob.media_hint = "application/octet-stream";
        payload.push_back(std::move(blob));
    }

    // Decoder references are digests of the named program blob's bytes.
    for (auto& blob : payload) {
        if (blob.encoding != BlobEncoding::vm_encoded) continue;
        const std::string& decoder_name = decoders.at(blob.name);
        const ContentBlob* decoder = nullptr;
        for (const auto& other : payload)
            if (other.name == decoder_name) decoder = &other;
        if (!decoder || decoder->encoding != BlobEncoding::vm_program)
            throw UsageFailure{"--encoded " + blob.name + " names no --vm-program blob '" +
                               decoder_name + "'"};
        blob.decoder_ref = sha256(decoder->bytes);
    }
    return payload;
}

std::vector<MetadataRecord> build_metadata(const std::vector<std::string>& specs) {
    std::vector<MetadataRecord> records;
    for (const auto& spec : specs) {
        auto [left, value] = split_eq(spec, "--meta");
        MetadataRecord r;
        if (auto colon = left.find(':'); colon != std::string::npos) {
            r.scheme = left.substr(0, colon);
            r.key = left.substr(colon + 1);
        } else {
            r.key = left;
        }
        r.value = value;
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Repository roots
// ---------------------------------------------------------------------------

std::vector<std::string> repo_roots(std::vector<std::string> flags, std::size_t minimum) {
    if (flags.empty()) {
        if (const char* env = std::getenv(kRepoEnvVar); env && *env) flags.push_back(env);
    }
    if (flags.size() < minimum)
        throw UsageFailure{"this subcommand needs " + std::to_string(minimum) +
                           " repository root(s); pass --repo or set " + kRepoEnvVar};
    return flags;
}

std::vector<const RepositoryStore*> store_pointers(const std::vector<RepositoryStore>& stores) {
    std::vector<const RepositoryStore*> out;
    for (const auto& s : stores) out.push_back(&s);
    return out;
}

ReferentResolver resolver_over(const std::vector<RepositoryStore>& stores) {
    return [&stores](const std::string& id) -> std::optional<std::vector<std::uint8_t>> {
        for (const auto& s : stores)
            if (auto bytes = s.raw_read(id)) return bytes;
        return std::nullopt;
    };
}

// ---------------------------------------------------------------------------
// Report printing
// ---------------------------------------------------------------------------

enum class OutputMode { text, canonical_document };

void print_verify_report(const VerificationReport& r, OutputMode mode) {
    if (mode == OutputMode::canonical_document) {
        Node n("verify-report");
        n.set_attr("chain", pass_fail(r.chain_ok));
        n.set_attr("date", pass_fail(r.date_ok));
        n.set_attr("decode", pass_fail(r.decode_ok));
        n.set_attr("grounding", pass_fail(r.grounding_ok));
        n.set_attr("grounding-path", grounding_name(r.grounding_path));
        n.set_attr("signature", pass_fail(r.signature_ok));
        n.set_attr("verdict", r.accepted() ? "accept" : "reject");
        std::cout << emit_document(n);
        return;
    }
    std::cout << "check decode: " << pass_fail(r.decode_ok) << "\n"
              << "check signature: " << pass_fail(r.signature_ok) << "\n"
              << "check chain: " << pass_fail(r.chain_ok) << "\n"
              << "check grounding: " << pass_fail(r.grounding_ok) << "\n"
              << "check date: " << pass_fail(r.date_ok) << "\n"
              << "grounding: " << grounding_name(r.grounding_path) << "\n";
    for (const auto& reason : r.reasons) std::cout << "reason: " << reason << "\n";
    std::cout << "verdict: " << (r.accepted() ? "accept" : "reject") << "\n";
}

void print_verdict(const AuthenticityVerdict& v, OutputMode mode) {
    if (mode == OutputMode::canonical_document) {
        Node n("judgment");
        n.set_attr("derivative", pass_fail(v.derivative_ok));
        n.set_attr("faithful", pass_fail(v.faithful_ok));
        n.set_attr("provenance", pass_fail(v.provenance_ok));
        n.set_attr("verdict", v.authentic ? "authentic" : "not-authentic");
        std::cout << emit_document(n);
        return;
    }
    std::cout << "check derivative: " << pass_fail(v.derivative_ok) << "\n"
              << "check provenance: " << pass_fail(v.provenance_ok) << "\n"
              << "check faithful: " << pass_fail(v.faithful_ok) << "\n";
    for (const auto& reason : v.reasons) std::cout << "reason: " << reason << "\n";
    std::cout << "verdict: " << (v.authentic ? "authentic" : "not-authentic") << "\n";
}

void print_object_summary(const TrustworthyDigitalObject& object) {
    const ProtectionBlock& p = object.protection;
    std::cout << "version: " << p.version_id.value << "\n"
              << "work: " << p.work_id.value << "\n"
              << "payload: " << object.payload.size() << " blobs\n";
    for (const auto& blob : object.payload)
        std::cout << "blob: " << blob.name << " " << blob.media_hint << " "
                  << to_string(blob.encoding) << " " << blob.bytes.size() << "\n";
    std::cout << "statement: creator=" << p.provenance_statement.creator
              << " created=" << p.provenance_statement.created
              << " event=" << p.provenance_statement.event << "\n"
              << "provenance: " << p.provenance.size() << " steps\n";
    for (const auto& step : p.provenance)
        std::cout << "step: " << step.index << " " << step.kind << " " << step.agent << " "
                  << step.event << " " << step.timestamp.to_string() << "\n";
    std::cout << "predecessors: " << p.predecessors.size() << "\n";
    for (const auto& ref : p.predecessors)
        std::cout << "ref: " << to_string(ref.target_kind) << " " << ref.target << " "
                  << ref.relation << "\n";
    std::cout << "links: " << p.links.size() << "\n";
    for (const auto& ref : p.links)
        std::cout << "ref: " << to_string(ref.target_kind) << " " << ref.target << " "
                  << ref.relation << "\n";
    std::cout << "metadata: " << p.metadata.size() << " records\n";
    for (const auto& m : p.metadata) {
        std::cout << "meta: " << m.key << "=" << m.value;
        if (!m.scheme.empty()) std::cout << " scheme=" << m.scheme;
        std::cout << "\n";
    }
    if (p.vm_spec_ref) std::cout << "vm-spec-ref: " << p.vm_spec_ref->hex() << "\n";
    if (!object.seal) {
        std::cout << "seal: absent\n";
    } else {
        std::cout << "seal: date=" << object.seal->seal_date.to_string() << " chain="
                  << object.seal->chain.size() << " certs\n";
        for (const auto& cert : object.seal->chain)
            std::cout << "cert: " << to_string(cert.role) << " " << cert.subject_name << " "
                      << cert.valid_from.to_string() << ".." << cert.valid_to.to_string() << "\n";
    }
    auto violations = validate_structure(object);
    if (violations.empty()) {
        std::cout << "structure: ok\n";
    } else {
        std::cout << "structure: " << violations.size() << " violations\n";
        for (const auto& v : violations)
            std::cout << "violation: " << v.field << ": " << v.rule << "\n";
    }
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_keygen(const std::string& out_prefix) {
    KeyPair key = generate_keypair();
    save_private_key(out_prefix + ".key", key);
    save_public_key(out_prefix + ".pub", key.public_key);
    std::cout << "private-key: " << out_prefix << ".key\n"
              << "public-key: " << out_prefix << ".pub\n"
              << "key-hex: " << hex_encode(key.public_key.bytes) << "\n";
    return 0;
}

int cmd_root_add(const std::string& store_path, const std::string& institution, int year,
                 const std::string& pub_path) {
    TrustStore store = load_trust_store(store_path);
    store = register_root_epoch(std::move(store), institution, year, load_public_key(pub_path));
    save_trust_store(store_path, store);
    std::cout << "root-epoch: " << institution << " " << year << "\n";
    return 0;
}

int cmd_peer_add(const std::string& store_path, const std::string& name,
                 const std::string& pub_path) {
    TrustStore store = load_trust_store(store_path);
    store = add_peer_key(std::move(store), name, load_public_key(pub_path));
    save_trust_store(store_path, store);
    std::cout << "peer: " << name << "\n";
    return 0;
}

int cmd_cert_issue(const std::string& key_path, const std::string& issuer_cert_path,
                   const std::string& pub_path, const std::string& subject,
                   const std::string& role_text, const std::string& from_text,
                   const std::string& to_text, const std::string& out_path) {
    auto role = cert_role_from(role_text);
    if (!role) throw UsageFailure{"--role must be root, witness, or editor"};
    std::optional<Certificate> issuer_cert;
    if (!issuer_cert_path.empty()) issuer_cert = load_certificate(issuer_cert_path);
    Certificate cert = issue_certificate(load_private_key(key_path), issuer_cert,
                                         load_public_key(pub_path), subject, *role,
                                         need_date(from_text, "--valid-from"),
                                         need_date(to_text, "--valid-to"));
    save_certificate(out_path, cert);
    std::cout << "certificate: " << out_path << "\n"
              << "cert-digest: " << certificate_digest(cert).hex() << "\n";
    return 0;
}

int cmd_pack(const PayloadFlags& flags, const std::string& out_path) {
    TrustworthyDigitalObject object =
        new_tdo(build_payload(flags), build_metadata(flags.metadata),
                ProvenanceStatement{flags.creator, "", flags.event});
    CanonicalDocument doc = encode(object);
    write_output(out_path, doc.bytes);
    std::cout << "version: " << object.protection.version_id.value << "\n";
    return 0;
}

int cmd_seal(const std::string& in_path, const std::string& key_path,
             const std::string& cert_path, const std::vector<std::string>& chain_paths,
             const std::string& date_text, const std::string& out_path) {
    TrustworthyDigitalObject object = decode(read_input(in_path));
    std::vector<Certificate> rest;
    for (const auto& p : chain_paths) rest.push_back(load_certificate(p));
    object = seal_tdo(object, load_private_key(key_path), load_certificate(cert_path), rest,
                      need_date(date_text, "--date"));
    CanonicalDocument doc = encode(object);
    write_output(out_path, doc.bytes);
    std::cout << "version: " << object.protection.version_id.value << "\n"
              << "sealed: " << object.seal->seal_date.to_string() << "\n";
    return 0;
}

int cmd_verify(const std::string& in_path, const std::string& trust_path, OutputMode mode) {
    VerificationReport report = verify_seal(read_input(in_path), load_trust_store(trust_path));
    print_verify_report(report, mode);
    return report.accepted() ? 0 : 1;
}

int cmd_inspect(const std::string& in_path, const std::string& trust_path) {
    auto bytes = read_input(in_path);
    TrustworthyDigitalObject object = decode(bytes); // undecodable -> exit 3
    print_object_summary(object);
    if (object.seal) {
        std::cout << "verification:\n";
        print_verify_report(verify_seal(bytes, load_trust_store(trust_path)), OutputMode::text);
    }
    return 0;
}

int cmd_derive(const std::string& pred_path, const std::string& trust_path,
               const std::string& mode_text, const std::string& source_path,
               const std::vector<std::string>& step_fields, const PayloadFlags& flags,
               const std::string& out_path) {
    if (mode_text != "nest" && mode_text != "link")
        throw UsageFailure{"--mode must be nest or link"};
    auto pred_bytes = read_input(pred_path);

    std::vector<std::uint8_t> current =
        source_path.empty() ? pred_bytes : read_input(source_path);
    DerivationStatement statement = make_statement(current);
    for (std::size_t i = 0; i + 5 <= step_fields.size(); i += 5) {
        auto output = read_input(step_fields[i + 1]);
        statement = record_transformation(std::move(statement), step_fields[i], current, output,
                                          step_fields[i + 2], step_fields[i + 3],
                                          need_date(step_fields[i + 4], "--step date"));
        current = std::move(output);
    }

    TrustworthyDigitalObject object = derive_version(
        pred_bytes, build_payload(flags),
        mode_text == "nest" ? DeriveMode::nest : DeriveMode::link, statement,
        ProvenanceStatement{flags.creator, "", flags.event}, build_metadata(flags.metadata),
        load_trust_store(trust_path));
    CanonicalDocument doc = encode(object);
    write_output(out_path, doc.bytes);
    std::cout << "version: " << object.protection.version_id.value << "\n"
              << "work: " << object.protection.work_id.value << "\n";
    return 0;
}

int cmd_judge(const std::string& in_path, const std::string& trust_path,
              const std::string& policy_path, const std::vector<std::string>& repo_flags,
              OutputMode mode) {
    std::vector<RepositoryStore> stores;
    for (const auto& root : repo_flags) stores.push_back(RepositoryStore::open(root));
    AuthenticityVerdict verdict =
        judge_authenticity(read_input(in_path), load_policy(policy_path),
                           load_trust_store(trust_path), resolver_over(stores));
    print_verdict(verdict, mode);
    return verdict.authentic ? 0 : 1;
}

int cmd_vm_asm(const std::string& in_path, const std::string& out_path) {
    VmProgram program = assemble(text_of(read_input(in_path)));
    auto bytes = program_bytes(program);
    write_output(out_path, bytes);
    std::cout << "assembled: " << bytes.size() << " bytes\n";
    return 0;
}

int cmd_vm_run(const std::string& prog_path, const std::string& input_path, std::uint64_t fuel,
               const std::string& out_path, const std::string& events_path) {
    VmProgram program = load_program(read_input(prog_path));
    std::vector<std::uint8_t> input;
    if (!input_path.empty()) input = read_input(input_path);
    ExecutionResult result = execute(program, input, fuel);

    std::cout << "halt: " << to_string(result.halted) << "\n"
              << "instructions: " << result.instructions_executed << "\n";
    if (result.halted == HaltKind::trap)
        std::cout << "trap: " << result.trap_reason << " at " << result.trap_offset << "\n";
    std::cout << "output: " << result.output.size() << " bytes\n"
              << "output-hex: " << hex_encode(result.output) << "\n";
    for (const auto& e : result.events) {
        std::cout << "event: " << e.t << " " << e.channel << " "
                  << (e.payload.empty() ? "-" : hex_encode(e.payload)) << "\n";
    }
    if (!out_path.empty()) write_output(out_path, result.output);
    if (!events_path.empty()) {
        std::string text = events_to_text(result.events);
        write_output(events_path,
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    return result.halted == HaltKind::normal ? 0 : 1;
}

int cmd_vm_spec(bool digest_only, const std::string& out_path) {
    if (digest_only) {
        std::cout << vm_spec_digest().hex() << "\n";
        return 0;
    }
    write_output(out_path, vm_self_description());
    return 0;
}

int cmd_replay_check(const std::string& a_path, const std::string& b_path) {
    auto a = events_from_text(text_of(read_input(a_path)));
    auto b = events_from_text(text_of(read_input(b_path)));
    auto shift = replay_equivalent(a, b);
    if (!shift) {
        std::cout << "replay: mismatch\n";
        return 1;
    }
    std::cout << "replay: equivalent\nshift: " << *shift << "\n";
    return 0;
}

int cmd_ingest(const std::string& in_path, const std::vector<std::string>& repo_flags) {
    auto roots = repo_roots(repo_flags, 1);
    RepositoryStore store = RepositoryStore::open(roots.front());
    VersionId id = store.ingest(read_input(in_path));
    std::cout << "ingested: " << id.value << "\n";
    return 0;
}

int cmd_get(const std::string& id, const std::vector<std::string>& repo_flags,
            const std::string& out_path) {
    auto roots = repo_roots(repo_flags, 1);
    RepositoryStore store = RepositoryStore::open(roots.front());
    write_output(out_path, store.retrieve(id));
    return 0;
}

int cmd_resolve(const std::string& work_id, const std::vector<std::string>& repo_flags) {
    auto roots = repo_roots(repo_flags, 1);
    RepositoryStore store = RepositoryStore::open(roots.front());
    for (const auto& version : store.resolve_work(work_id)) std::cout << version.value << "\n";
    return 0;
}

int cmd_replicate(const std::string& id, const std::vector<std::string>& repo_flags) {
    auto roots = repo_roots(repo_flags, 2);
    if (roots.size() != 2) throw UsageFailure{"replicate needs exactly two --repo roots"};
    RepositoryStore source = RepositoryStore::open(roots[0]);
    RepositoryStore target = RepositoryStore::open(roots[1]);
    bool copied = replicate(source, target, id);
    std::cout << (copied ? "replicated: " : "already-present: ") << id << "\n";
    return 0;
}

int cmd_audit(const std::string& id, const std::vector<std::string>& repo_flags, int threshold,
              OutputMode mode) {
    auto roots = repo_roots(repo_flags, 1);
    std::vector<RepositoryStore> stores;
    for (const auto& root : roots) stores.push_back(RepositoryStore::open(root));
    AuditReport report = audit_replicas(store_pointers(stores), id, threshold);
    if (mode == OutputMode::canonical_document) {
        Node n("audit");
        n.set_attr("at-risk", report.at_risk ? "yes" : "no");
        n.set_attr("found", std::to_string(report.replicas_found));
        n.set_attr("id", report.version_id.value);
        n.set_attr("threshold", std::to_string(report.threshold));
        n.set_attr("verified", std::to_string(report.replicas_verified));
        std::cout << emit_document(n);
    } else {
        std::cout << "object: " << report.version_id.value << "\n"
                  << "replicas-found: " << report.replicas_found << "\n"
                  << "replicas-verified: " << report.replicas_verified << "\n"
                  << "threshold: " << report.threshold << "\n"
                  << "at-risk: " << (report.at_risk ? "yes" : "no") << "\n";
    }
    return report.at_risk ? 1 : 0;
}

int cmd_scan_links(const std::string& id, const std::vector<std::string>& repo_flags) {
    auto roots = repo_roots(repo_flags, 1);
    std::vector<RepositoryStore> stores;
    for (const auto& root : roots) stores.push_back(RepositoryStore::open(root));
    std::vector<const RepositoryStore*> peers;
    for (std::size_t i = 1; i < stores.size(); ++i) peers.push_back(&stores[i]);
    LinkScanReport report = scan_links(stores.front(), id, peers);

    bool all_match = true;
    for (const auto& check : report.checks) {
        std::cout << "link: " << (check.from_predecessors ? "predecessor" : "link") << " "
                  << to_string(check.ref.target_kind) << " " << check.ref.target << " "
                  << to_string(check.outcome) << "\n";
        all_match = all_match && check.outcome == LinkOutcome::resolved_match;
    }
    std::cout << "verdict: " << (all_match ? "intact" : "dissociated") << "\n";
    return all_match ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trustworthy digital object toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name
    int rc = 0;

    std::string trust_path = "trust.store";
    std::vector<std::string> repos;
    std::string output_mode_text = "text";
    app.add_option("--trust-store", trust_path, "trust store file (default trust.store)");
    app.add_option("--repo", repos, "repository root (repeatable)");
    app.add_option("--output", output_mode_text, "report form: text or canonical-document")
        ->check(CLI::IsMember({"text", "canonical-document"}));
    auto mode = [&] {
        return output_mode_text == "canonical-document" ? OutputMode::canonical_document
                                                        : OutputMode::text;
    };

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate a signing key pair");
    static std::string kg_out;
    keygen->add_option("--out", kg_out, "output path prefix")->required();
    keygen->callback([&] { rc = cmd_keygen(kg_out); });

    // root-add
    auto* root_add = app.add_subcommand("root-add", "register an institutional root key epoch");
    static std::string ra_inst, ra_pub;
    static int ra_year = 0;
    root_add->add_option("--institution", ra_inst)->required();
    root_add->add_option("--year", ra_year)->required();
    root_add->add_option("--pub", ra_pub, "root public key file")->required();
    root_add->callback([&] { rc = cmd_root_add(trust_path, ra_inst, ra_year, ra_pub); });

    // peer-add
    auto* peer_add = app.add_subcommand("peer-add", "register a directly shared peer key");
    static std::string pa_name, pa_pub;
    peer_add->add_option("--name", pa_name)->required();
    peer_add->add_option("--pub", pa_pub, "peer public key file")->required();
    peer_add->callback([&] { rc = cmd_peer_add(trust_path, pa_name, pa_pub); });

    // cert-issue
    auto* cert_issue = app.add_subcommand("cert-issue", "issue a certificate");
    static std::string ci_key, ci_issuer_cert, ci_pub, ci_subject, ci_role, ci_from, ci_to, ci_out;
    cert_issue->add_option("--key", ci_key, "issuer private key file")->required();
    cert_issue->add_option("--issuer-cert", ci_issuer_cert, "issuer certificate (omit for root)");
    cert_issue->add_option("--pub", ci_pub, "subject public key file")->required();
    cert_issue->add_option("--subject", ci_subject, "subject name")->required();
    cert_issue->add_option("--role", ci_role, "root, witness, or editor")->required();
    cert_issue->add_option("--valid-from", ci_from)->required();
    cert_issue->add_option("--valid-to", ci_to)->required();
    cert_issue->add_option("--out", ci_out)->required();
    cert_issue->callback([&] {
        rc = cmd_cert_issue(ci_key, ci_issuer_cert, ci_pub, ci_subject, ci_role, ci_from, ci_to,
                            ci_out);
    });

    // pack
    auto* pack = app.add_subcommand("pack", "build an unsealed first-version object");
    static PayloadFlags pk_flags;
    static std::string pk_out;
    add_payload_flags(pack, pk_flags);
    pack->add_option("--out", pk_out)->required();
    pack->callback([&] { rc = cmd_pack(pk_flags, pk_out); });

    // seal
    auto* seal = app.add_subcommand("seal", "sign an object with a certificate chain");
    static std::string sl_in, sl_key, sl_cert, sl_date, sl_out;
    static std::vector<std::string> sl_chain;
    seal->add_option("file", sl_in, "unsealed object file")->required();
    seal->add_option("--key", sl_key, "signer private key file")->required();
    seal->add_option("--cert", sl_cert, "signer certificate file")->required();
    seal->add_option("--chain", sl_chain, "issuer certificates, signer side first");
    seal->add_option("--date", sl_date, "seal date YYYY-MM-DD")->required();
    seal->add_option("--out", sl_out)->required();
    seal->callback([&] { rc = cmd_seal(sl_in, sl_key, sl_cert, sl_chain, sl_date, sl_out); });

    // verify
    auto* verify = app.add_subcommand("verify", "verify a sealed object offline");
    static std::string vf_in;
    verify->add_option("file", vf_in, "sealed object file")->required();
    verify->callback([&] { rc = cmd_verify(vf_in, trust_path, mode()); });

    // inspect
    auto* inspect = app.add_subcommand("inspect", "describe an object without judging it");
    static std::string in_in;
    inspect->add_option("file", in_in, "object file")->required();
    inspect->callback([&] { rc = cmd_inspect(in_in, trust_path); });

    // derive
    auto* derive = app.add_subcommand("derive", "build the successor of a sealed object");
    static PayloadFlags dv_flags;
    static std::string dv_pred, dv_mode = "link", dv_source, dv_out;
    static std::vector<std::string> dv_steps;
    derive->add_option("predecessor", dv_pred, "sealed predecessor file")->required();
    derive->add_option("--mode", dv_mode, "nest or link (default link)");
    derive->add_option("--source", dv_source, "derivation source bytes (default: predecessor)");
    derive->add_option("--step", dv_steps,
                       "transformation: KIND OUTPUT-FILE AGENT EVENT DATE")
        ->type_size(5);
    add_payload_flags(derive, dv_flags);
    derive->add_option("--out", dv_out)->required();
    derive->callback([&] {
        rc = cmd_derive(dv_pred, trust_path, dv_mode, dv_source, dv_steps, dv_flags, dv_out);
    });

    // judge
    auto* judge = app.add_subcommand("judge", "full authenticity judgment");
    static std::string jd_in, jd_policy;
    judge->add_option("file", jd_in, "sealed object file")->required();
    judge->add_option("--policy", jd_policy, "genre policy file")->required();
    judge->callback([&] { rc = cmd_judge(jd_in, trust_path, jd_policy, repos, mode()); });

    // vm-asm
    auto* vm_asm = app.add_subcommand("vm-asm", "assemble a program");
    static std::string va_in, va_out;
    vm_asm->add_option("file", va_in, "assembly source file")->required();
    vm_asm->add_option("--out", va_out)->required();
    vm_asm->callback([&] { rc = cmd_vm_asm(va_in, va_out); });

    // vm-run
    auto* vm_run = app.add_subcommand("vm-run", "execute a program deterministically");
    static std::string vr_prog, vr_input, vr_out, vr_events;
    static std::uint64_t vr_fuel = kDefaultFuel;
    vm_run->add_option("program", vr_prog, "program file")->required();
    vm_run->add_option("--input", vr_input, "input bytes file");
    vm_run->add_option("--fuel", vr_fuel, "instruction budget");
    vm_run->add_option("--out", vr_out, "write output bytes here");
    vm_run->add_option("--events-out", vr_events, "write the event log here");
    vm_run->callback([&] { rc = cmd_vm_run(vr_prog, vr_input, vr_fuel, vr_out, vr_events); });

    // vm-spec
    auto* vm_spec = app.add_subcommand("vm-spec", "emit the machine's self-description");
    static bool vs_digest = false;
    static std::string vs_out = "-";
    vm_spec->add_flag("--digest", vs_digest, "print only the document digest");
    vm_spec->add_option("--out", vs_out, "destination (default stdout)");
    vm_spec->callback([&] { rc = cmd_vm_spec(vs_digest, vs_out); });

    // replay-check
    auto* replay = app.add_subcommand("replay-check", "compare two event logs up to a time shift");
    static std::string rp_a, rp_b;
    replay->add_option("original", rp_a, "event log file")->required();
    replay->add_option("replay", rp_b, "event log file")->required();
    replay->callback([&] { rc = cmd_replay_check(rp_a, rp_b); });

    // ingest
    auto* ingest = app.add_subcommand("ingest", "admit a sealed object into a store");
    static std::string ig_in;
    ingest->add_option("file", ig_in, "sealed object file")->required();
    ingest->callback([&] { rc = cmd_ingest(ig_in, repos); });

    // get
    auto* get = app.add_subcommand("get", "retrieve an object, digest-checked");
    static std::string gt_id, gt_out = "-";
    get->add_option("id", gt_id, "version id")->required();
    get->add_option("--out", gt_out, "destination (default stdout)");
    get->callback([&] { rc = cmd_get(gt_id, repos, gt_out); });

    // resolve
    auto* resolve = app.add_subcommand("resolve", "list stored versions of a work");
    static std::string rs_id;
    resolve->add_option("work-id", rs_id)->required();
    resolve->callback([&] { rc = cmd_resolve(rs_id, repos); });

    // replicate
    auto* repl = app.add_subcommand("replicate", "copy one object between stores");
    static std::string rp_id;
    repl->add_option("id", rp_id, "version id")->required();
    repl->callback([&] { rc = cmd_replicate(rp_id, repos); });

    // audit
    auto* audit = app.add_subcommand("audit", "count healthy replicas across stores");
    static std::string au_id;
    static int au_threshold = kDefaultAuditThreshold;
    audit->add_option("id", au_id, "version id")->required();
    audit->add_option("--threshold", au_threshold, "minimum verified replicas");
    audit->callback([&] { rc = cmd_audit(au_id, repos, au_threshold, mode()); });

    // scan-links
    auto* scan = app.add_subcommand("scan-links", "check every reference against held bytes");
    static std::string sc_id;
    scan->add_option("id", sc_id, "version id")->required();
    scan->callback([&] { rc = cmd_scan_links(sc_id, repos); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageFailure& e) {
        std::cerr << "usage error: " << e.message << "\n";
        return 2;
    } catch (const tdo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
