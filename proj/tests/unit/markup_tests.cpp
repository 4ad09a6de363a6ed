#include <doctest.h>

#include "support/testutil.hpp"
#include "tdo/errors.hpp"
#include "tdo/markup.hpp"

using namespace tdo;

namespace {
std::vector<std::uint8_t> as_bytes(std::string_view s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}
} // namespace

TEST_CASE("emission sorts attributes and uses the empty form") {
    Node n("item");
    n.set_attr("zeta", "1").set_attr("alpha", "2");
    CHECK(emit_document(n) == "<item alpha=\"2\" zeta=\"1\"/>");
}

TEST_CASE("emission escapes minimally") {
    Node n("t");
    n.set_text("a<b&c>d");
    CHECK(emit_document(n) == "<t>a&lt;b&amp;c&gt;d</t>");
    Node m("t");
    m.set_attr("v", "say \"hi\" & go");
    CHECK(emit_document(m) == "<t v=\"say &quot;hi&quot; &amp; go\"/>");
}

TEST_CASE("emission refuses what the canonical form cannot carry") {
    Node control("t");
    control.set_text("bell\x07");
    CHECK_THROWS_AS(emit_document(control), StructuralError);

    Node dup("t");
    dup.attrs.push_back({"a", "1"});
    dup.attrs.push_back({"a", "2"});
    CHECK_THROWS_AS(emit_document(dup), StructuralError);

    Node mixed("t");
    mixed.set_text("x");
    mixed.children.push_back(Node("c"));
    CHECK_THROWS_AS(emit_document(mixed), StructuralError);
}

TEST_CASE("parse inverts emit") {
    Node root("doc");
    root.set_attr("version", "1");
    Node child("entry");
    child.set_attr("name", "a&b");
    child.set_text("text with <angle> & amp");
    root.add_child(std::move(child));
    root.add_child(Node("empty"));

    std::string doc = emit_document(root);
    Node parsed = parse_document(as_bytes(doc));
    CHECK(parsed == root);
    CHECK(emit_document(parsed) == doc);
}

TEST_CASE("parser tolerates near-canonical variants") {
    Node expected("a");
    expected.set_attr("x", "1");
    expected.add_child(Node("b"));

    CHECK(parse_document(as_bytes("<a x=\"1\"><b/></a>")) == expected);
    CHECK(parse_document(as_bytes("<a x=\"1\">\n  <b></b>\n</a>")) == expected);
    CHECK(parse_document(as_bytes("<a x=\"1\"><!-- note --><b/></a>")) == expected);
    CHECK(parse_document(as_bytes("<a x='1'><b/></a>")) == expected);

    Node ref("c");
    ref.set_text("A B");
    CHECK(parse_document(as_bytes("<c>&#65; &#x42;</c>")) == ref);
}

TEST_CASE("canonicality check separates parseable from canonical") {
    CHECK(is_canonical_document(as_bytes("<a x=\"1\"><b/></a>")));
    CHECK_FALSE(is_canonical_document(as_bytes("<a x='1'><b/></a>")));
    CHECK_FALSE(is_canonical_document(as_bytes("<a x=\"1\"> <b/></a>")));
    CHECK_FALSE(is_canonical_document(as_bytes("<a x=\"1\"><b></b></a>")));
}

TEST_CASE("parse errors carry byte offsets") {
    try {
        parse_document(as_bytes("<a><b></a>"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() > 0);
        CHECK(e.offset() < 10);
    }

    CHECK_THROWS_AS(parse_document(as_bytes("")), ParseError);
    CHECK_THROWS_AS(parse_document(as_bytes("no markup")), ParseError);
    CHECK_THROWS_AS(parse_document(as_bytes("<a")), ParseError);
    CHECK_THROWS_AS(parse_document(as_bytes("<a/><b/>")), ParseError);
    CHECK_THROWS_AS(parse_document(as_bytes("<a>&unknown;</a>")), ParseError);
    CHECK_THROWS_AS(parse_document(as_bytes("<a \xff=\"1\"/>")), ParseError);
}

TEST_CASE("node tree round-trip property") {
    testing::Rng rng(104);
    for (int trial = 0; trial < 100; ++trial) {
        Node root("r");
        std::size_t kids = rng.below(5);
        for (std::size_t i = 0; i < kids; ++i) {
            Node child("c" + std::to_string(i));
            if (rng.chance(0.5)) child.set_attr("k", rng.ident());
            if (rng.chance(0.5))
                child.set_text(rng.ident());
            else if (rng.chance(0.3))
                child.add_child(Node("leaf"));
            root.add_child(std::move(child));
        }
        std::string doc = emit_document(root);
        CHECK(parse_document(as_bytes(doc)) == root);
        CHECK(is_canonical_document(as_bytes(doc)));
    }
}
