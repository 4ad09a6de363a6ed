#include "tdo/textcodec.hpp"

#include <array>

namespace tdo {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";
constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<int, 256> make_b64_reverse() {
    std::array<int, 256> table{};
    table.fill(-1);
    for (int i = 0; i < 64; ++i) {
        table[static_cast<unsigned char>(kB64Alphabet[i])] = i;
    }
    return table;
}

const std::array<int, 256>& b64_reverse() {
    static const std::array<int, 256> table = make_b64_reverse();
    return table;
}

} // namespace

std::string hex_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0F]);
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view text) {
    if (text.size() % 2 != 0) {
        return std::nullopt;
    }
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2) {
        int hi = -1;
        int lo = -1;
        char a = text[i];
        char b = text[i + 1];
        if (a >= '0' && a <= '9') hi = a - '0';
        else if (a >= 'a' && a <= 'f') hi = a - 'a' + 10;
        if (b >= '0' && b <= '9') lo = b - '0';
        else if (b >= 'a' && b <= 'f') lo = b - 'a' + 10;
        if (hi < 0 || lo < 0) {
            return std::nullopt;
        }
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16 |
                          static_cast<std::uint32_t>(bytes[i + 1]) << 8 |
                          static_cast<std::uint32_t>(bytes[i + 2]);
        out.push_back(kB64Alphabet[v >> 18 & 0x3F]);
        out.push_back(kB64Alphabet[v >> 12 & 0x3F]);
        out.push_back(kB64Alphabet[v >> 6 & 0x3F]);
        out.push_back(kB64Alphabet[v & 0x3F]);
    }
    std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        out.push_back(kB64Alphabet[v >> 18 & 0x3F]);
        out.push_back(kB64Alphabet[v >> 12 & 0x3F]);
        out.push_back('=');
        out.push_back('=');
    } else if (rest == 2) {
        std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16 |
                          static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        out.push_back(kB64Alphabet[v >> 18 & 0x3F]);
        out.push_back(kB64Alphabet[v >> 12 & 0x3F]);
        out.push_back(kB64Alphabet[v >> 6 & 0x3F]);
        out.push_back('=');
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        return std::nullopt;
    }
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    const auto& rev = b64_reverse();
    for (std::size_t i = 0; i < text.size(); i += 4) {
        bool last = i + 4 == text.size();
        int pad = 0;
        if (last && text[i + 3] == '=') {
            pad = text[i + 2] == '=' ? 2 : 1;
        }
        int v0 = rev[static_cast<unsigned char>(text[i])];
        int v1 = rev[static_cast<unsigned char>(text[i + 1])];
        int v2 = pad == 2 ? 0 : rev[static_cast<unsigned char>(text[i + 2])];
        int v3 = pad >= 1 ? 0 : rev[static_cast<unsigned char>(text[i + 3])];
        if (v0 < 0 || v1 < 0 || v2 < 0 || v3 < 0) {
            return std::nullopt;
        }
        std::uint32_t v = static_cast<std::uint32_t>(v0) << 18 |
                          static_cast<std::uint32_t>(v1) << 12 |
                          static_cast<std::uint32_t>(v2) << 6 |
                          static_cast<std::uint32_t>(v3);
        // Trailing bits beyond the encoded bytes must be zero, otherwise two
        // distinct strings would decode to the same bytes.
        if (pad == 2) {
            if ((v & 0xFFFF) != 0) return std::nullopt;
            out.push_back(static_cast<std::uint8_t>(v >> 16));
        } else if (pad == 1) {
            if ((v & 0xFF) != 0) return std::nullopt;
            out.push_back(static_cast<std::uint8_t>(v >> 16));
            out.push_back(static_cast<std::uint8_t>(v >> 8 & 0xFF));
        } else {
            out.push_back(static_cast<std::uint8_t>(v >> 16));
            out.push_back(static_cast<std::uint8_t>(v >> 8 & 0xFF));
            out.push_back(static_cast<std::uint8_t>(v & 0xFF));
        }
    }
    return out;
}

bool utf8_valid(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > text.size()) {
            return false;
        }
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) {
                return false;
            }
            cp = cp << 6 | (cc & 0x3F);
        }
        // Overlong forms, surrogates, and out-of-range code points.
        if (len == 2 && cp < 0x80) return false;
        if (len == 3 && cp < 0x800) return false;
        if (len == 4 && cp < 0x10000) return false;
        if (cp >= 0xD800 && cp <= 0xDFFF) return false;
        if (cp > 0x10FFFF) return false;
        i += len;
    }
    return true;
}

bool attr_value_safe(std::string_view text) {
    if (!utf8_valid(text)) {
        return false;
    }
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x20 || u == 0x7F) {
            return false;
        }
    }
    return true;
}

bool text_content_safe(std::string_view text) {
    if (!utf8_valid(text)) {
        return false;
    }
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if ((u < 0x20 && u != '\t' && u != '\n') || u == 0x7F) {
            return false;
        }
    }
    return true;
}

} // namespace tdo
