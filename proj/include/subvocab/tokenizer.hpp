#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subvocab/token_set.hpp"
#include "subvocab/vocab.hpp"

namespace subvocab {

// The byte <-> printable-codepoint bijection of byte-level BPE: printable
// bytes map to themselves, the remaining 68 map to U+0100 and up.
namespace bytelevel {
char32_t byte_to_codepoint(unsigned char b);
std::optional<unsigned char> codepoint_to_byte(char32_t cp);
}

struct MergeRule {
    std::string left;
    std::string right;
    int rank = 0;  // dense from 0, lower applies earlier
};

// Script classification of a token surface, used by language filtering.
struct ScriptClass {
    enum class Kind { AllowedNeutral, Block, ByteFragment };
    Kind kind = Kind::AllowedNeutral;
    int block = -1;  // index into the Unicode block table when kind == Block

    std::string_view block_name() const;
    bool operator==(const ScriptClass&) const = default;
};

// BPE tokenizer over a fixed vocabulary + merge table. Immutable after
// construction; encode/decode are pure.
class Tokenizer {
public:
    static Tokenizer load(const std::filesystem::path& path);
    // `origin` labels error messages (a path or "<inline>").
    static Tokenizer parse(std::string_view json_text, std::string_view origin);

    const VocabularyTable& table() const { return table_; }
    bool byte_level() const { return table_.byte_level(); }
    const TokenSet& special_ids() const { return special_ids_; }
    const std::vector<MergeRule>& merges() const { return merges_; }

    std::vector<TokenId> encode(std::string_view text) const;
    // Variant recording the rank of each merge in application order.
    std::vector<TokenId> encode(std::string_view text, std::vector<int>* applied_ranks) const;

    std::string decode(std::span<const TokenId> ids) const;

    ScriptClass classify_script(TokenId id) const;

private:
    Tokenizer() = default;

    std::vector<TokenId> initial_symbols(std::string_view text) const;

    VocabularyTable table_;
    std::vector<MergeRule> merges_;
    TokenSet special_ids_;

    // merge lookup keyed by (left_id << 32) | right_id
    struct MergeTarget {
        int rank;
        TokenId merged;
    };
    std::unordered_map<std::uint64_t, MergeTarget> pair_map_;

    // initial symbol lookup
    std::array<std::int64_t, 256> byte_initial_{};              // byte-level
    std::unordered_map<std::string, TokenId> char_initial_;     // character-level
};

} // namespace subvocab
