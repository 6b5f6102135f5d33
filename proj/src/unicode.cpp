#include "subvocab/unicode.hpp"

#include <algorithm>
#include <cctype>

namespace subvocab::unicode {

namespace {
#include "unicode_tables.inc"

// UAX#44 loose matching: lowercase, drop spaces/hyphens/underscores.
std::string normalize_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (c == ' ' || c == '-' || c == '_') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

template <typename Range, std::size_t N>
bool in_sorted_ranges(char32_t cp, const Range (&ranges)[N]) {
    std::size_t lo = 0, hi = N;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cp > ranges[mid].hi)
            lo = mid + 1;
        else if (cp < ranges[mid].lo)
            hi = mid;
        else
            return true;
    }
    return false;
}

} // namespace

const char* version() { return kUnicodeVersion; }

std::optional<int> block_of(char32_t cp) {
    std::size_t lo = 0, hi = std::size(kBlocks);
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cp > kBlocks[mid].hi)
            lo = mid + 1;
        else if (cp < kBlocks[mid].lo)
            hi = mid;
        else
            return static_cast<int>(mid);
    }
    return std::nullopt;
}

const char* block_name(int block_index) { return kBlocks[block_index].name; }

int block_count() { return static_cast<int>(std::size(kBlocks)); }

std::optional<int> find_block(std::string_view name) {
    const std::string needle = normalize_name(name);
    for (std::size_t i = 0; i < std::size(kBlocks); ++i)
        if (normalize_name(kBlocks[i].name) == needle) return static_cast<int>(i);
    return std::nullopt;
}

std::vector<std::string_view> all_block_names() {
    std::vector<std::string_view> names;
    names.reserve(std::size(kBlocks));
    for (const auto& b : kBlocks) names.emplace_back(b.name);
    std::sort(names.begin(), names.end());
    return names;
}

bool is_letter(char32_t cp) { return in_sorted_ranges(cp, kLetterRanges); }

std::size_t decode_utf8(std::string_view s, std::size_t pos, char32_t& cp) {
    if (pos >= s.size()) return 0;
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    const unsigned char c0 = byte(pos);

    if (c0 < 0x80) {
        cp = c0;
        return 1;
    }
    auto cont = [&](std::size_t i) { return i < s.size() && (byte(i) & 0xC0) == 0x80; };

    if ((c0 & 0xE0) == 0xC0) {
        if (!cont(pos + 1)) return 0;
        cp = (char32_t(c0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
        return cp >= 0x80 ? 2 : 0;  // reject overlong
    }
    if ((c0 & 0xF0) == 0xE0) {
        if (!cont(pos + 1) || !cont(pos + 2)) return 0;
        cp = (char32_t(c0 & 0x0F) << 12) | (char32_t(byte(pos + 1) & 0x3F) << 6) |
             (byte(pos + 2) & 0x3F);
        if (cp < 0x800) return 0;
        if (cp >= 0xD800 && cp <= 0xDFFF) return 0;  // surrogate
        return 3;
    }
    if ((c0 & 0xF8) == 0xF0) {
        if (!cont(pos + 1) || !cont(pos + 2) || !cont(pos + 3)) return 0;
        cp = (char32_t(c0 & 0x07) << 18) | (char32_t(byte(pos + 1) & 0x3F) << 12) |
             (char32_t(byte(pos + 2) & 0x3F) << 6) | (byte(pos + 3) & 0x3F);
        if (cp < 0x10000 || cp > 0x10FFFF) return 0;
        return 4;
    }
    return 0;
}

bool is_valid_utf8(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        char32_t cp;
        const std::size_t n = decode_utf8(s, pos, cp);
        if (n == 0) return false;
        pos += n;
    }
    return true;
}

std::string encode_utf8(char32_t cp) {
    std::string out;
    if (cp <= 0x7F) {
        out.push_back(static_cast<char>(cp));
    } else if (cp <= 0x7FF) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0xFFFF) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

} // namespace subvocab::unicode
