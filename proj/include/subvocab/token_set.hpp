#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace subvocab {

// Index into a vocabulary table. Valid ids are 0..vocab_size-1.
using TokenId = std::uint32_t;

// Set of token ids over a fixed universe [0, universe_size). Dense bitset
// representation; one bit per vocabulary slot keeps set algebra exact and
// cheap for vocabularies up to a few hundred thousand tokens.
class TokenSet {
public:
    TokenSet() = default;
    explicit TokenSet(std::size_t universe_size);

    static TokenSet from_ids(std::size_t universe_size, std::span<const TokenId> ids);

    std::size_t universe_size() const { return universe_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool contains(TokenId id) const;
    void insert(TokenId id);   // throws IntegrityError if id >= universe
    void erase(TokenId id);

    // Ascending list of members.
    std::vector<TokenId> to_ids() const;

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                fn(static_cast<TokenId>(w * 64 + b));
                bits &= bits - 1;
            }
        }
    }

    bool operator==(const TokenSet& other) const = default;

    // Set algebra. Both operands must share the same universe size;
    // mismatches throw IntegrityError.
    friend TokenSet set_union(const TokenSet& a, const TokenSet& b);
    friend TokenSet set_intersection(const TokenSet& a, const TokenSet& b);
    friend TokenSet set_difference(const TokenSet& a, const TokenSet& b);

    bool is_subset_of(const TokenSet& other) const;

private:
    static void check_same_universe(const TokenSet& a, const TokenSet& b);
    void recount();

    std::size_t universe_ = 0;
    std::size_t count_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace subvocab
