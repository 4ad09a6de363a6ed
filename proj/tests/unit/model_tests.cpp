#include <doctest.h>

#include <algorithm>

#include "support/ref_sha256.hpp"
#include "support/testutil.hpp"
#include "tdo/canonical.hpp"
#include "tdo/digest.hpp"
#include "tdo/errors.hpp"
#include "tdo/model.hpp"
#include "tdo/textcodec.hpp"

using namespace tdo;

namespace {

TrustworthyDigitalObject simple_tdo() {
    ContentBlob blob;
    blob.name = "text";
    blob.media_hint = "text/plain";
    blob.bytes = {'h', 'i'};
    return new_tdo({blob}, {{"title", "greeting", ""}}, {"author", "", "first-draft"});
}

bool flags_field(const std::vector<Violation>& v, std::string_view needle) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) {
        return x.field.find(needle) != std::string::npos;
    });
}

} // namespace

TEST_CASE("version id is the payload digest, confirmed by a reference digest") {
    TrustworthyDigitalObject tdo = simple_tdo();
    auto block = payload_block_bytes(tdo.payload);
    CHECK(tdo.protection.version_id.value == testing::ref_sha256_hex(block));
    CHECK(tdo.protection.work_id.value == tdo.protection.version_id.value);
    CHECK(tdo.protection.provenance_statement.created == tdo.protection.version_id.value);
}

TEST_CASE("any payload change moves the version id") {
    testing::Rng rng(105);
    for (int i = 0; i < 50; ++i) {
        TrustworthyDigitalObject tdo = testing::random_tdo(rng);
        auto original = tdo.protection.version_id;

        auto mutated = tdo.payload;
        if (mutated[0].bytes.empty())
            mutated[0].bytes.push_back(0x01);
        else
            mutated[0].bytes[0] ^= 0x01;
        CHECK(derive_version_id(mutated).value != original.value);

        auto renamed = tdo.payload;
        renamed[0].name += "x";
        CHECK(derive_version_id(renamed).value != original.value);
    }
}

TEST_CASE("derive_version_id refuses degenerate payloads") {
    CHECK_THROWS_AS(derive_version_id({}), StructuralError);
    ContentBlob a;
    a.name = "same";
    a.media_hint = "text/plain";
    ContentBlob b = a;
    CHECK_THROWS_AS(derive_version_id({a, b}), StructuralError);
}

TEST_CASE("new_tdo normalizes metadata order") {
    ContentBlob blob;
    blob.name = "b";
    blob.media_hint = "text/plain";
    std::vector<MetadataRecord> meta = {
        {"title", "z", ""}, {"creator", "a", ""}, {"note", "n", "local"}};
    auto tdo = new_tdo({blob}, meta, {"who", "", "ev"});
    REQUIRE(tdo.protection.metadata.size() == 3);
    // Unschemed records come first (empty scheme sorts lowest), then by key.
    CHECK(tdo.protection.metadata[0].key == "creator");
    CHECK(tdo.protection.metadata[1].key == "title");
    CHECK(tdo.protection.metadata[2].key == "note");
    CHECK(validate_structure(tdo).empty());
}

TEST_CASE("generated objects are structurally clean") {
    testing::Rng rng(106);
    for (int i = 0; i < 100; ++i) {
        auto tdo = testing::random_tdo(rng);
        auto violations = validate_structure(tdo);
        CAPTURE(violations.empty() ? "" : violations[0].field + ": " + violations[0].rule);
        CHECK(violations.empty());
    }
}

TEST_CASE("validate_structure flags a forged version id") {
    auto tdo = simple_tdo();
    tdo.protection.version_id.value[0] = tdo.protection.version_id.value[0] == 'a' ? 'b' : 'a';
    CHECK(flags_field(validate_structure(tdo), "version_id"));
}

TEST_CASE("validate_structure flags payload faults") {
    auto tdo = simple_tdo();
    tdo.payload.clear();
    CHECK(flags_field(validate_structure(tdo), "payload"));

    tdo = simple_tdo();
    tdo.payload.push_back(tdo.payload[0]);
    CHECK(flags_field(validate_structure(tdo), "payload"));

    tdo = simple_tdo();
    tdo.payload[0].name = "";
    CHECK(flags_field(validate_structure(tdo), "name"));
}

TEST_CASE("validate_structure ties predecessors to the work id") {
    auto tdo = simple_tdo();
    // First version claiming a different work: flagged both ways.
    tdo.protection.work_id.value = std::string(64, 'a');
    CHECK(flags_field(validate_structure(tdo), "work_id"));

    tdo = simple_tdo();
    ExternalReference ref;
    ref.target_kind = RefKind::version;
    ref.target = std::string(64, 'b');
    ref.expected_digest = sha256(std::string_view("x"));
    ref.relation = "predecessor";
    tdo.protection.predecessors.push_back(ref);
    // Predecessor present while work == version.
    CHECK(flags_field(validate_structure(tdo), "predecessors"));
}

TEST_CASE("validate_structure checks statement and provenance") {
    auto tdo = simple_tdo();
    tdo.protection.provenance_statement.creator = "";
    CHECK(flags_field(validate_structure(tdo), "creator"));

    tdo = simple_tdo();
    TransformationRecord step;
    step.index = 2; // must start at 1
    step.kind = "excerpt";
    step.input_digest = sha256(std::string_view("a"));
    step.output_digest = sha256(std::string_view("b"));
    step.agent = "agent";
    step.event = "event";
    step.timestamp = Date{2004, 1, 1};
    tdo.protection.provenance.push_back(step);
    CHECK(flags_field(validate_structure(tdo), "provenance"));
}

TEST_CASE("validate_structure requires reference digests") {
    auto tdo = simple_tdo();
    ExternalReference ref;
    ref.target_kind = RefKind::version;
    ref.target = std::string(64, 'c');
    ref.relation = "cites";
    tdo.protection.links.push_back(ref); // no expected_digest
    CHECK(flags_field(validate_structure(tdo), "expected_digest"));
}

TEST_CASE("validate_structure polices metadata schemes and order") {
    auto tdo = simple_tdo();
    tdo.protection.metadata.push_back({"homemade-key", "v", ""});
    CHECK(flags_field(validate_structure(tdo), ".key"));

    tdo = simple_tdo();
    tdo.protection.metadata.insert(tdo.protection.metadata.begin(), {"title", "later", ""});
    CHECK(flags_field(validate_structure(tdo), "metadata"));
}

TEST_CASE("validate_structure ties vm_spec_ref to encoded blobs") {
    auto tdo = simple_tdo();
    tdo.protection.vm_spec_ref = std::nullopt;
    CHECK(validate_structure(tdo).empty()); // raw-only payload needs none

    ContentBlob program;
    program.name = "prog";
    program.media_hint = "application/devm";
    program.encoding = BlobEncoding::vm_program;
    program.bytes = {'D', 'E', 'V', 'M'};
    auto with_program = new_tdo({tdo.payload[0], program}, {}, {"a", "", "e"});
    CHECK(with_program.protection.vm_spec_ref.has_value());
    with_program.protection.vm_spec_ref = std::nullopt;
    CHECK(flags_field(validate_structure(with_program), "vm_spec_ref"));
}

TEST_CASE("validate_structure never throws, even on garbage") {
    TrustworthyDigitalObject garbage;
    garbage.protection.version_id.value = "not hex at all";
    garbage.protection.work_id.value = "";
    ContentBlob bad;
    bad.name = "bad\x01name";
    garbage.payload.push_back(bad);
    auto violations = validate_structure(garbage);
    CHECK_FALSE(violations.empty());
}

TEST_CASE("builtin metadata keys are sorted and closed") {
    const auto& keys = builtin_metadata_keys();
    CHECK(std::is_sorted(keys.begin(), keys.end()));
    CHECK(std::find(keys.begin(), keys.end(), "title") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "creator") != keys.end());
}
