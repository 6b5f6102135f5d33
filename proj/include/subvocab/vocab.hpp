#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subvocab/token_set.hpp"

namespace subvocab {

// One vocabulary entry. `surface` holds the token's decoded byte content
// (for byte-level vocabularies this is the unmapped raw bytes, not the
// printable form stored in the tokenizer file).
struct TokenRecord {
    TokenId id = 0;
    std::string surface;
    bool is_special = false;
    bool surface_is_utf8 = false;

    // Decoded form when the bytes are valid UTF-8.
    std::optional<std::string_view> display() const {
        if (surface_is_utf8) return std::string_view(surface);
        return std::nullopt;
    }
};

// The id <-> surface universe of a tokenizer. Ids are dense: exactly
// 0..size-1. surface -> id is injective for non-special tokens.
class VocabularyTable {
public:
    VocabularyTable() = default;
    VocabularyTable(std::vector<TokenRecord> records, bool byte_level);

    std::size_t size() const { return records_.size(); }
    bool byte_level() const { return byte_level_; }

    const TokenRecord& record(TokenId id) const;  // throws IntegrityError if out of range
    const std::vector<TokenRecord>& records() const { return records_; }

    std::optional<TokenId> find_surface(std::string_view surface) const;

private:
    std::vector<TokenRecord> records_;
    std::unordered_map<std::string, TokenId> surface_to_id_;
    bool byte_level_ = false;
};

// One profiling example: tokenized input and ground-truth output.
struct Document {
    std::vector<TokenId> input_ids;
    std::vector<TokenId> output_ids;
    std::int64_t doc_index = 0;
};

} // namespace subvocab
