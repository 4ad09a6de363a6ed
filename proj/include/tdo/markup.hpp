#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tdo {

// One element of a canonical markup document. An element carries either child
// elements or text content, never both.
struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<Node> children;
    std::string text;

    bool operator==(const Node&) const = default;

    Node() = default;
    explicit Node(std::string n) : name(std::move(n)) {}

    Node& set_attr(std::string key, std::string value);
    Node& add_child(Node child);
    Node& set_text(std::string t);

    std::optional<std::string_view> attr(std::string_view key) const;
    const Node* child(std::string_view name) const;
};

// Canonical emission: UTF-8, no prolog, attributes sorted by name, no
// insignificant whitespace, `<name/>` for empty elements, minimal escaping
// (&amp; &lt; &gt; in text, plus &quot; in attribute values). Throws
// StructuralError for values the canonical form cannot carry (control
// characters, duplicate attribute names, element with both text and children).
std::string emit_document(const Node& root);

// Parser for the markup subset. Deliberately a little more lenient than the
// canonical form (whitespace between elements, any attribute order, both
// empty-element spellings, named and numeric character references, comments)
// so that near-miss documents parse and then fail the byte-exact canonicality
// comparison instead of being reported as malformed. Throws ParseError with a
// byte offset for anything outside the subset.
Node parse_document(std::span<const std::uint8_t> bytes);

// True iff bytes re-emit byte-identically after parsing.
bool is_canonical_document(std::span<const std::uint8_t> bytes);

} // namespace tdo
