#include "subvocab/tokenizer.hpp"

#include <array>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "json.hpp"

#include "subvocab/error.hpp"
#include "subvocab/unicode.hpp"

namespace subvocab {

namespace bytelevel {

namespace {

struct ByteTables {
    std::array<char32_t, 256> to_cp;
    std::map<char32_t, unsigned char> to_byte;

    ByteTables() {
        auto printable = [](int b) {
            return (b >= 33 && b <= 126) || (b >= 161 && b <= 172) || (b >= 174 && b <= 255);
        };
        int n = 0;
        for (int b = 0; b < 256; ++b) {
            const char32_t cp = printable(b) ? static_cast<char32_t>(b)
                                             : static_cast<char32_t>(256 + n++);
            to_cp[b] = cp;
            to_byte[cp] = static_cast<unsigned char>(b);
        }
    }
};

const ByteTables& tables() {
    static const ByteTables t;
    return t;
}

} // namespace

char32_t byte_to_codepoint(unsigned char b) { return tables().to_cp[b]; }

std::optional<unsigned char> codepoint_to_byte(char32_t cp) {
    const auto& m = tables().to_byte;
    auto it = m.find(cp);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

} // namespace bytelevel

std::string_view ScriptClass::block_name() const {
    return kind == Kind::Block ? unicode::block_name(block) : std::string_view{};
}

namespace {

using nlohmann::json;

std::uint64_t pack_pair(TokenId a, TokenId b) {
    return (std::uint64_t{a} << 32) | b;
}

// Unmap a byte-level printable key back to raw bytes.
std::string surface_from_bytelevel_key(const std::string& key, TokenId id) {
    std::string surface;
    surface.reserve(key.size());
    std::size_t pos = 0;
    while (pos < key.size()) {
        char32_t cp;
        const std::size_t n = unicode::decode_utf8(key, pos, cp);
        if (n == 0)
            throw IntegrityError("byte-level vocab entry for id " + std::to_string(id) +
                                 " is not valid UTF-8");
        const auto b = bytelevel::codepoint_to_byte(cp);
        if (!b)
            throw IntegrityError("byte-level vocab entry for id " + std::to_string(id) +
                                 " contains codepoint U+" + [&] {
                                     std::ostringstream os;
                                     os << std::hex << std::uppercase << static_cast<std::uint32_t>(cp);
                                     return os.str();
                                 }() + " outside the byte alphabet");
        surface.push_back(static_cast<char>(*b));
        pos += n;
    }
    return surface;
}

std::string printable_char(std::string_view text, std::size_t pos, std::size_t len) {
    if (len == 0) {  // lone invalid byte
        std::ostringstream os;
        os << "0x" << std::hex << std::uppercase
           << static_cast<int>(static_cast<unsigned char>(text[pos]));
        return os.str();
    }
    return "'" + std::string(text.substr(pos, len)) + "'";
}

} // namespace

Tokenizer Tokenizer::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open tokenizer file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

Tokenizer Tokenizer::parse(std::string_view json_text, std::string_view origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(origin) + ": " + e.what());
    }

    if (!doc.is_object() || !doc.contains("vocab") || !doc["vocab"].is_object())
        throw ParseError(std::string(origin) + ": missing \"vocab\" object");
    if (!doc.contains("merges") || !doc["merges"].is_array())
        throw ParseError(std::string(origin) + ": missing \"merges\" array");

    const bool byte_level = doc.value("byte_level", false);

    const json& vocab = doc["vocab"];
    const std::size_t size = vocab.size();
    std::vector<std::string> keys(size);
    std::vector<bool> seen(size, false);
    std::unordered_map<std::string, TokenId> key_to_id;
    key_to_id.reserve(size);
    for (auto it = vocab.begin(); it != vocab.end(); ++it) {
        if (!it.value().is_number_unsigned())
            throw ParseError(std::string(origin) + ": vocab entry \"" + it.key() +
                             "\" has a non-integer id");
        const std::uint64_t id = it.value().get<std::uint64_t>();
        if (id >= size)
            throw IntegrityError("vocab ids must form 0.." + std::to_string(size - 1) +
                                 "; \"" + it.key() + "\" has id " + std::to_string(id));
        if (seen[id])
            throw IntegrityError("duplicate vocab id " + std::to_string(id));
        seen[id] = true;
        keys[id] = it.key();
        key_to_id.emplace(it.key(), static_cast<TokenId>(id));
    }

    Tokenizer t;
    t.special_ids_ = TokenSet(size);
    if (doc.contains("special_tokens")) {
        for (const json& s : doc["special_tokens"]) {
            const std::string name = s.get<std::string>();
            auto it = key_to_id.find(name);
            if (it == key_to_id.end())
                throw IntegrityError("special token \"" + name + "\" not present in vocab");
            t.special_ids_.insert(it->second);
        }
    }

    std::vector<TokenRecord> records(size);
    for (std::size_t id = 0; id < size; ++id) {
        TokenRecord& r = records[id];
        r.id = static_cast<TokenId>(id);
        r.is_special = t.special_ids_.contains(static_cast<TokenId>(id));
        r.surface = (byte_level && !r.is_special)
                        ? surface_from_bytelevel_key(keys[id], static_cast<TokenId>(id))
                        : keys[id];
        r.surface_is_utf8 = unicode::is_valid_utf8(r.surface);
    }
    t.table_ = VocabularyTable(std::move(records), byte_level);

    // Initial-symbol tables. Byte-level requires the full 256-byte base so
    // the round-trip invariant can hold.
    if (byte_level) {
        for (int b = 0; b < 256; ++b) {
            const std::string key =
                unicode::encode_utf8(bytelevel::byte_to_codepoint(static_cast<unsigned char>(b)));
            auto it = key_to_id.find(key);
            if (it == key_to_id.end())
                throw IntegrityError("byte-level vocab is missing the base token for byte " +
                                     std::to_string(b));
            t.byte_initial_[b] = it->second;
        }
    } else {
        for (const auto& [key, id] : key_to_id) {
            if (t.special_ids_.contains(id)) continue;
            char32_t cp;
            if (unicode::decode_utf8(key, 0, cp) == key.size())
                t.char_initial_.emplace(key, id);
        }
    }

    int rank = 0;
    for (const json& m : doc["merges"]) {
        const std::string rule = m.get<std::string>();
        const std::size_t space = rule.find(' ');
        if (space == std::string::npos || space == 0 || space + 1 == rule.size())
            throw ParseError(std::string(origin) + ": merge \"" + rule +
                             "\" is not of the form \"left right\"");
        MergeRule mr{rule.substr(0, space), rule.substr(space + 1), rank};

        auto left = key_to_id.find(mr.left);
        auto right = key_to_id.find(mr.right);
        auto merged = key_to_id.find(mr.left + mr.right);
        if (left == key_to_id.end() || right == key_to_id.end())
            throw IntegrityError("merge \"" + rule + "\" references a token not in the vocab");
        if (merged == key_to_id.end())
            throw IntegrityError("merge \"" + rule + "\" produces \"" + mr.left + mr.right +
                                 "\" which is not in the vocab");
        t.pair_map_.emplace(pack_pair(left->second, right->second),
                            MergeTarget{rank, merged->second});
        t.merges_.push_back(std::move(mr));
        ++rank;
    }

    return t;
}

std::vector<TokenId> Tokenizer::initial_symbols(std::string_view text) const {
    std::vector<TokenId> ids;
    ids.reserve(text.size());
    if (byte_level()) {
        for (unsigned char b : text)
            ids.push_back(static_cast<TokenId>(byte_initial_[b]));
        return ids;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp;
        const std::size_t n = unicode::decode_utf8(text, pos, cp);
        const std::string ch(text.substr(pos, n == 0 ? 1 : n));
        auto it = char_initial_.find(ch);
        if (n == 0 || it == char_initial_.end())
            throw ParseError("cannot encode character " + printable_char(text, pos, n) +
                             ": no base token in the vocabulary");
        ids.push_back(it->second);
        pos += n == 0 ? 1 : n;
    }
    return ids;
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
    return encode(text, nullptr);
}

std::vector<TokenId> Tokenizer::encode(std::string_view text,
                                       std::vector<int>* applied_ranks) const {
    std::vector<TokenId> ids = initial_symbols(text);
    const std::size_t n = ids.size();
    if (n < 2) return ids;

    // Linked list over symbol slots; merges applied lowest rank first,
    // leftmost first among equal ranks.
    std::vector<std::size_t> prev(n), next(n);
    std::vector<bool> alive(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        prev[i] = i == 0 ? n : i - 1;
        next[i] = i + 1;
    }

    struct Candidate {
        int rank;
        std::size_t left;
        std::size_t right;
        bool operator>(const Candidate& o) const {
            return rank != o.rank ? rank > o.rank : left > o.left;
        }
    };
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;

    auto push_pair = [&](std::size_t i, std::size_t j) {
        auto it = pair_map_.find(pack_pair(ids[i], ids[j]));
        if (it != pair_map_.end()) heap.push({it->second.rank, i, j});
    };
    for (std::size_t i = 0; i + 1 < n; ++i) push_pair(i, i + 1);

    while (!heap.empty()) {
        const Candidate c = heap.top();
        heap.pop();
        if (!alive[c.left] || !alive[c.right] || next[c.left] != c.right) continue;
        auto it = pair_map_.find(pack_pair(ids[c.left], ids[c.right]));
        if (it == pair_map_.end() || it->second.rank != c.rank) continue;  // stale entry

        ids[c.left] = it->second.merged;
        alive[c.right] = false;
        next[c.left] = next[c.right];
        if (next[c.right] < n) prev[next[c.right]] = c.left;
        if (applied_ranks) applied_ranks->push_back(c.rank);

        if (prev[c.left] < n) push_pair(prev[c.left], c.left);
        if (next[c.left] < n) push_pair(c.left, next[c.left]);
    }

    std::vector<TokenId> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; i = next[i]) {
        out.push_back(ids[i]);
        if (next[i] >= n) break;
    }
    return out;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) out += table_.record(id).surface;
    return out;
}

ScriptClass Tokenizer::classify_script(TokenId id) const {
    const TokenRecord& r = table_.record(id);
    if (!r.surface_is_utf8) return {ScriptClass::Kind::ByteFragment, -1};

    // Majority Unicode block over the surface's letter codepoints; ties get
    // the byte-fragment treatment. No letters at all means script-neutral.
    std::map<int, int> block_counts;
    std::size_t pos = 0;
    while (pos < r.surface.size()) {
        char32_t cp;
        const std::size_t n = unicode::decode_utf8(r.surface, pos, cp);
        pos += n;
        if (!unicode::is_letter(cp)) continue;
        const auto block = unicode::block_of(cp);
        ++block_counts[block ? *block : -1];
    }
    if (block_counts.empty()) return {ScriptClass::Kind::AllowedNeutral, -1};

    int best_block = -1, best_count = 0;
    bool tied = false;
    for (const auto& [block, count] : block_counts) {
        if (count > best_count) {
            best_block = block;
            best_count = count;
            tied = false;
        } else if (count == best_count) {
            tied = true;
        }
    }
    if (tied || best_block < 0) return {ScriptClass::Kind::ByteFragment, -1};
    return {ScriptClass::Kind::Block, best_block};
}

} // namespace subvocab
