#include "tdo/markup.hpp"

#include <algorithm>
#include <set>

#include "tdo/errors.hpp"
#include "tdo/textcodec.hpp"

namespace tdo {

namespace {

bool name_char(char c, bool first) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
        return true;
    }
    return !first && ((c >= '0' && c <= '9') || c == '-' || c == '.');
}

bool valid_name(std::string_view s) {
    if (s.empty() || !name_char(s[0], true)) {
        return false;
    }
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!name_char(s[i], false)) {
            return false;
        }
    }
    return true;
}

void escape_text(std::string_view in, std::string& out) {
    for (char c : in) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c);
        }
    }
}

void escape_attr(std::string_view in, std::string& out) {
    for (char c : in) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
}

void emit_node(const Node& node, std::string& out) {
    if (!valid_name(node.name)) {
        throw StructuralError("invalid element name: \"" + node.name + "\"");
    }
    if (!node.children.empty() && !node.text.empty()) {
        throw StructuralError("element <" + node.name + "> has both children and text");
    }
    auto attrs = node.attrs;
    std::sort(attrs.begin(), attrs.end());
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (!valid_name(attrs[i].first)) {
            throw StructuralError("invalid attribute name in <" + node.name + ">");
        }
        if (i > 0 && attrs[i].first == attrs[i - 1].first) {
            throw StructuralError("duplicate attribute \"" + attrs[i].first + "\" in <" +
                                  node.name + ">");
        }
        if (!attr_value_safe(attrs[i].second)) {
            throw StructuralError("attribute \"" + attrs[i].first + "\" of <" + node.name +
                                  "> carries bytes outside the canonical character set");
        }
    }
    if (!text_content_safe(node.text)) {
        throw StructuralError("text content of <" + node.name +
                              "> carries bytes outside the canonical character set");
    }
    out.push_back('<');
    out += node.name;
    for (const auto& [k, v] : attrs) {
        out.push_back(' ');
        out += k;
        out += "=\"";
        escape_attr(v, out);
        out.push_back('"');
    }
    if (node.children.empty() && node.text.empty()) {
        out += "/>";
        return;
    }
    out.push_back('>');
    if (!node.children.empty()) {
        for (const Node& c : node.children) {
            emit_node(c, out);
        }
    } else {
        escape_text(node.text, out);
    }
    out += "</";
    out += node.name;
    out.push_back('>');
}

class Parser {
public:
    explicit Parser(std::span<const std::uint8_t> bytes)
        : data_(reinterpret_cast<const char*>(bytes.data()), bytes.size()) {}

    Node run() {
        skip_misc();
        Node root = parse_element();
        skip_misc();
        if (pos_ != data_.size()) {
            fail("trailing content after document element");
        }
        return root;
    }

private:
    std::string_view data_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    bool eof() const { return pos_ >= data_.size(); }
    char peek() const { return data_[pos_]; }

    char next() {
        if (eof()) {
            fail("unexpected end of document");
        }
        return data_[pos_++];
    }

    void expect(char c) {
        if (eof() || data_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    static bool space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    void skip_space() {
        while (!eof() && space(peek())) {
            ++pos_;
        }
    }

    // Whitespace and comments between elements.
    void skip_misc() {
        for (;;) {
            skip_space();
            if (pos_ + 3 < data_.size() && data_.substr(pos_, 4) == "<!--") {
                std::size_t end = data_.find("-->", pos_ + 4);
                if (end == std::string_view::npos) {
                    fail("unterminated comment");
                }
                pos_ = end + 3;
                continue;
            }
            return;
        }
    }

    std::string parse_name() {
        std::size_t start = pos_;
        if (eof() || !name_char(peek(), true)) {
            fail("expected name");
        }
        ++pos_;
        while (!eof() && name_char(peek(), false)) {
            ++pos_;
        }
        return std::string(data_.substr(start, pos_ - start));
    }

    void append_reference(std::string& out) {
        // pos_ is just past '&'.
        std::size_t semi = data_.find(';', pos_);
        if (semi == std::string_view::npos || semi - pos_ > 8) {
            fail("malformed character reference");
        }
        std::string_view body = data_.substr(pos_, semi - pos_);
        if (body == "amp") out.push_back('&');
        else if (body == "lt") out.push_back('<');
        else if (body == "gt") out.push_back('>');
        else if (body == "quot") out.push_back('"');
        else if (body == "apos") out.push_back('\'');
        else if (!body.empty() && body[0] == '#') {
            std::uint32_t cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (std::size_t i = 2; i < body.size() && ok; ++i) {
                    char c = body[i];
                    int v;
                    if (c >= '0' && c <= '9') v = c - '0';
                    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
                    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
                    else { ok = false; break; }
                    cp = cp * 16 + static_cast<std::uint32_t>(v);
                    ok = cp <= 0x10FFFF;
                }
                ok = ok && body.size() > 2;
            } else {
                for (std::size_t i = 1; i < body.size() && ok; ++i) {
                    char c = body[i];
                    if (c < '0' || c > '9') { ok = false; break; }
                    cp = cp * 10 + static_cast<std::uint32_t>(c - '0');
                    ok = cp <= 0x10FFFF;
                }
            }
            if (!ok || cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) {
                fail("malformed character reference");
            }
            // Encode the code point as UTF-8.
            if (cp < 0x80) {
                out.push_back(static_cast<char>(cp));
            } else if (cp < 0x800) {
                out.push_back(static_cast<char>(0xC0 | cp >> 6));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else if (cp < 0x10000) {
                out.push_back(static_cast<char>(0xE0 | cp >> 12));
                out.push_back(static_cast<char>(0x80 | (cp >> 6 & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else {
                out.push_back(static_cast<char>(0xF0 | cp >> 18));
                out.push_back(static_cast<char>(0x80 | (cp >> 12 & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp >> 6 & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            }
        } else {
            fail("unknown entity reference");
        }
        pos_ = semi + 1;
    }

    std::string parse_attr_value() {
        char quote = next();
        if (quote != '"' && quote != '\'') {
            --pos_;
            fail("expected quoted attribute value");
        }
        std::string value;
        for (;;) {
            if (eof()) {
                fail("unterminated attribute value");
            }
            char c = next();
            if (c == quote) {
                break;
            }
            if (c == '<') {
                --pos_;
                fail("'<' in attribute value");
            }
            if (c == '&') {
                append_reference(value);
            } else {
                value.push_back(c);
            }
        }
        return value;
    }

    Node parse_element() {
        expect('<');
        Node node;
        node.name = parse_name();
        std::set<std::string> seen;
        for (;;) {
            bool had_space = !eof() && space(peek());
            skip_space();
            if (eof()) {
                fail("unterminated element tag");
            }
            if (peek() == '/') {
                ++pos_;
                expect('>');
                return node;
            }
            if (peek() == '>') {
                ++pos_;
                break;
            }
            if (!had_space) {
                fail("expected whitespace before attribute");
            }
            std::string key = parse_name();
            if (!seen.insert(key).second) {
                fail("duplicate attribute \"" + key + "\"");
            }
            skip_space();
            expect('=');
            skip_space();
            node.attrs.emplace_back(std::move(key), parse_attr_value());
        }
        // Content: child elements (whitespace and comments between them are
        // ignorable) or one text value. Non-whitespace text next to elements
        // is mixed content, which the subset does not have.
        std::string text;
        bool text_nonspace = false;
        for (;;) {
            if (eof()) {
                fail("unterminated element <" + node.name + ">");
            }
            if (peek() == '<') {
                if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '/') {
                    pos_ += 2;
                    std::string closing = parse_name();
                    if (closing != node.name) {
                        fail("mismatched closing tag </" + closing + ">");
                    }
                    skip_space();
                    expect('>');
                    break;
                }
                if (pos_ + 3 < data_.size() && data_.substr(pos_, 4) == "<!--") {
                    skip_misc();
                    continue;
                }
                if (text_nonspace) {
                    fail("mixed text and element content in <" + node.name + ">");
                }
                node.children.push_back(parse_element());
                continue;
            }
            char c = next();
            if (c == '&') {
                append_reference(text);
                text_nonspace = true;
            } else {
                text.push_back(c);
                if (!space(c)) {
                    text_nonspace = true;
                }
            }
        }
        if (!node.children.empty()) {
            if (text_nonspace) {
                fail("mixed text and element content in <" + node.name + ">");
            }
            return node; // surrounding whitespace runs are padding
        }
        node.text = std::move(text);
        return node;
    }
};

} // namespace

Node& Node::set_attr(std::string key, std::string value) {
    attrs.emplace_back(std::move(key), std::move(value));
    return *this;
}

Node& Node::add_child(Node child) {
    children.push_back(std::move(child));
    return *this;
}

Node& Node::set_text(std::string t) {
    text = std::move(t);
    return *this;
}

std::optional<std::string_view> Node::attr(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
        if (k == key) {
            return std::string_view(v);
        }
    }
    return std::nullopt;
}

const Node* Node::child(std::string_view name) const {
    for (const Node& c : children) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

std::string emit_document(const Node& root) {
    std::string out;
    emit_node(root, out);
    return out;
}

Node parse_document(std::span<const std::uint8_t> bytes) {
    return Parser(bytes).run();
}

bool is_canonical_document(std::span<const std::uint8_t> bytes) {
    try {
        Node root = parse_document(bytes);
        std::string re = emit_document(root);
        return re.size() == bytes.size() &&
               std::equal(re.begin(), re.end(), bytes.begin(),
                          [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; });
    } catch (const Error&) {
        return false;
    }
}

} // namespace tdo
