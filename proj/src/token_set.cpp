#include "subvocab/token_set.hpp"

#include <bit>

#include "subvocab/error.hpp"

namespace subvocab {

TokenSet::TokenSet(std::size_t universe_size)
    : universe_(universe_size), words_((universe_size + 63) / 64, 0) {}

TokenSet TokenSet::from_ids(std::size_t universe_size, std::span<const TokenId> ids) {
    TokenSet s(universe_size);
    for (TokenId id : ids) s.insert(id);
    return s;
}

bool TokenSet::contains(TokenId id) const {
    if (id >= universe_) return false;
    return (words_[id / 64] >> (id % 64)) & 1u;
}

void TokenSet::insert(TokenId id) {
    if (id >= universe_)
        throw IntegrityError("token id " + std::to_string(id) +
                             " out of range for universe of size " +
                             std::to_string(universe_));
    std::uint64_t& w = words_[id / 64];
    const std::uint64_t bit = std::uint64_t{1} << (id % 64);
    if (!(w & bit)) {
        w |= bit;
        ++count_;
    }
}

void TokenSet::erase(TokenId id) {
    if (id >= universe_) return;
    std::uint64_t& w = words_[id / 64];
    const std::uint64_t bit = std::uint64_t{1} << (id % 64);
    if (w & bit) {
        w &= ~bit;
        --count_;
    }
}

std::vector<TokenId> TokenSet::to_ids() const {
    std::vector<TokenId> out;
    out.reserve(count_);
    for_each([&](TokenId id) { out.push_back(id); });
    return out;
}

void TokenSet::check_same_universe(const TokenSet& a, const TokenSet& b) {
    if (a.universe_ != b.universe_)
        throw IntegrityError("set operation over mismatched vocabulary sizes: " +
                             std::to_string(a.universe_) + " vs " +
                             std::to_string(b.universe_));
}

void TokenSet::recount() {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    count_ = n;
}

TokenSet set_union(const TokenSet& a, const TokenSet& b) {
    TokenSet::check_same_universe(a, b);
    TokenSet out(a.universe_);
    for (std::size_t i = 0; i < out.words_.size(); ++i)
        out.words_[i] = a.words_[i] | b.words_[i];
    out.recount();
    return out;
}

TokenSet set_intersection(const TokenSet& a, const TokenSet& b) {
    TokenSet::check_same_universe(a, b);
    TokenSet out(a.universe_);
    for (std::size_t i = 0; i < out.words_.size(); ++i)
        out.words_[i] = a.words_[i] & b.words_[i];
    out.recount();
    return out;
}

TokenSet set_difference(const TokenSet& a, const TokenSet& b) {
    TokenSet::check_same_universe(a, b);
    TokenSet out(a.universe_);
    for (std::size_t i = 0; i < out.words_.size(); ++i)
        out.words_[i] = a.words_[i] & ~b.words_[i];
    out.recount();
    return out;
}

bool TokenSet::is_subset_of(const TokenSet& other) const {
    check_same_universe(*this, other);
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & ~other.words_[i]) return false;
    return true;
}

} // namespace subvocab
