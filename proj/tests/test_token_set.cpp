#include "doctest.h"

#include <random>

#include "subvocab/error.hpp"
#include "subvocab/token_set.hpp"

#include "test_helpers.hpp"

using namespace subvocab;

namespace {

TokenSet make(std::size_t universe, std::initializer_list<TokenId> ids) {
    TokenSet s(universe);
    for (TokenId id : ids) s.insert(id);
    return s;
}

TokenSet random_set(std::mt19937_64& rng, std::size_t universe) {
    std::uniform_int_distribution<std::size_t> count(0, universe);
    std::uniform_int_distribution<TokenId> token(0, static_cast<TokenId>(universe - 1));
    TokenSet s(universe);
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) s.insert(token(rng));
    return s;
}

} // namespace

TEST_CASE("from_ids deduplicates") {
    CHECK(TokenSet::from_ids(8, std::vector<TokenId>{}).to_ids().empty());

    const std::vector<TokenId> ids{3, 3, 1};
    CHECK(TokenSet::from_ids(8, ids).to_ids() == std::vector<TokenId>{1, 3});
}

TEST_CASE("from_ids over tokenized text") {
    const auto tok = testutil::load_toy_tokenizer();
    const auto ids = tok.encode("aca");
    const TokenSet s = TokenSet::from_ids(tok.table().size(), ids);
    CHECK(s.to_ids() == std::vector<TokenId>{0, 2});
}

TEST_CASE("set algebra basics") {
    CHECK(set_union(make(8, {1, 2}), make(8, {2, 3})).to_ids() ==
          std::vector<TokenId>{1, 2, 3});
    CHECK(set_difference(make(8, {1, 2}), make(8, {})).to_ids() ==
          std::vector<TokenId>{1, 2});
    CHECK(set_intersection(make(8, {1, 2}), make(8, {2, 3})).to_ids() ==
          std::vector<TokenId>{2});

    // fold of the fixture input sets
    const TokenSet u =
        set_union(set_union(make(8, {0, 1}), make(8, {0, 2})), make(8, {1}));
    CHECK(u.to_ids() == std::vector<TokenId>{0, 1, 2});
}

TEST_CASE("mismatched universes are rejected") {
    CHECK_THROWS_AS(set_union(make(8, {1}), make(9, {1})), IntegrityError);
    CHECK_THROWS_AS(make(4, {}).insert(4), IntegrityError);
}

TEST_CASE("union is a superset of every operand") {
    const TokenSet a = make(8, {0, 1}), b = make(8, {0, 2}), c = make(8, {1});
    const TokenSet u = set_union(set_union(a, b), c);
    CHECK(a.is_subset_of(u));
    CHECK(b.is_subset_of(u));
    CHECK(c.is_subset_of(u));
}

TEST_CASE("set algebra laws on random sets") {
    std::mt19937_64 rng(0xA11CE);
    for (int iter = 0; iter < 200; ++iter) {
        const TokenSet a = random_set(rng, 64);
        const TokenSet b = random_set(rng, 64);
        const TokenSet c = random_set(rng, 64);

        CHECK(set_union(a, b) == set_union(b, a));
        CHECK(set_intersection(a, b) == set_intersection(b, a));
        CHECK(set_union(set_union(a, b), c) == set_union(a, set_union(b, c)));
        CHECK(set_intersection(set_intersection(a, b), c) ==
              set_intersection(a, set_intersection(b, c)));
        CHECK(set_union(a, a) == a);
        CHECK(set_intersection(a, a) == a);
        CHECK(set_difference(a, a).empty());
        CHECK(set_union(set_difference(a, b), set_intersection(a, b)) == a);
    }
}

TEST_CASE("erase and size stay consistent") {
    TokenSet s = make(100, {5, 50, 99});
    CHECK(s.size() == 3);
    s.erase(50);
    CHECK(s.size() == 2);
    CHECK_FALSE(s.contains(50));
    s.erase(50);  // idempotent
    CHECK(s.size() == 2);
}
