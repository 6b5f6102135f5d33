#include "doctest.h"

#include <random>
#include <set>

#include "subvocab/artifacts.hpp"
#include "subvocab/error.hpp"
#include "subvocab/profiler.hpp"
#include "subvocab/selector.hpp"
#include "subvocab/static_builder.hpp"

#include "test_helpers.hpp"

using namespace subvocab;

namespace {

TokenSet make(std::size_t universe, std::initializer_list<TokenId> ids) {
    TokenSet s(universe);
    for (TokenId id : ids) s.insert(id);
    return s;
}

SelectionPlan synthetic_plan(std::size_t n_static, std::size_t n_dynamic, std::size_t full) {
    SelectionPlan p;
    p.n_static = n_static;
    p.n_dynamic = n_dynamic;
    p.full_vocab_size = full;
    p.active_ids.resize(n_static + n_dynamic);
    for (std::size_t i = 0; i < p.active_ids.size(); ++i)
        p.active_ids[i] = static_cast<TokenId>(i);
    return p;
}

} // namespace

TEST_CASE("select on the fixture") {
    const auto tok = testutil::load_toy_tokenizer();
    const TokenSet statics = make(8, {3, 4});
    const auto ids = tok.encode("aca");

    const SelectionPlan plan = select(ids, statics, 8);
    CHECK(plan.active_ids == std::vector<TokenId>{0, 2, 3, 4});
    CHECK(plan.n_dynamic == 2);
    CHECK(plan.n_static == 2);
    CHECK(plan.full_vocab_size == 8);

    // idempotent
    const SelectionPlan again = select(ids, statics, 8);
    CHECK(again.active_ids == plan.active_ids);
    CHECK(again.n_dynamic == plan.n_dynamic);
}

TEST_CASE("select with an empty static set") {
    const std::vector<TokenId> ids{7, 3, 3};
    const SelectionPlan plan = select(ids, TokenSet(16), 16);
    CHECK(plan.active_ids == std::vector<TokenId>{3, 7});
    CHECK(plan.n_dynamic == 2);
    CHECK(plan.n_static == 0);
}

TEST_CASE("input inside the static set adds nothing") {
    const TokenSet statics = make(8, {1, 2, 5});
    const SelectionPlan plan = select(std::vector<TokenId>{2, 1, 2}, statics, 8);
    CHECK(plan.n_dynamic == 0);
    CHECK(plan.active_ids == std::vector<TokenId>{1, 2, 5});
}

TEST_CASE("out-of-range ids are rejected") {
    CHECK_THROWS_AS(select(std::vector<TokenId>{8}, TokenSet(8), 8), IntegrityError);
    CHECK_THROWS_AS(select(std::vector<TokenId>{0}, TokenSet(4), 8), IntegrityError);
}

TEST_CASE("remap_out inverts the gather") {
    const SelectionPlan plan = select(std::vector<TokenId>{0, 2}, make(8, {3, 4}), 8);
    CHECK(remap_out(plan, 0) == 0);
    CHECK(remap_out(plan, 3) == 4);
    CHECK_THROWS_AS(remap_out(plan, 4), IntegrityError);

    // identity plan over the full vocabulary
    std::vector<TokenId> all(8);
    for (TokenId i = 0; i < 8; ++i) all[i] = i;
    const SelectionPlan identity = select(all, TokenSet(8), 8);
    for (std::size_t k = 0; k < 8; ++k) CHECK(remap_out(identity, k) == k);
}

TEST_CASE("global_to_local inverts local_to_global") {
    const SelectionPlan plan = select(std::vector<TokenId>{0, 2}, make(8, {3, 4}), 8);
    for (std::size_t k = 0; k < plan.active_ids.size(); ++k)
        CHECK(plan.global_to_local(plan.active_ids[k]) == k);
    CHECK_FALSE(plan.global_to_local(1).has_value());
}

TEST_CASE("vocabulary line format matches the reporting convention") {
    CHECK(format_vocab_line(18874, 40.0, 151643) == "18,874 + [40] (12.47%)");
    CHECK(format_vocab_line(0, 105.0, 128000) == "[105] (0.08%)");
    CHECK(format_vocab_line(2, 2.0, 8) == "2 + [2] (50.00%)");
    CHECK(format_vocab_line(1234567, 0.4, 2000000) == "1,234,567 + [0] (61.73%)");
}

TEST_CASE("format_thousands") {
    CHECK(format_thousands(0) == "0");
    CHECK(format_thousands(999) == "999");
    CHECK(format_thousands(1000) == "1,000");
    CHECK(format_thousands(18874) == "18,874");
    CHECK(format_thousands(1234567890) == "1,234,567,890");
}

TEST_CASE("batch stats reproduce the reporting convention") {
    SUBCASE("paper-shaped numbers") {
        std::vector<SelectionPlan> plans{synthetic_plan(18874, 35, 151643),
                                         synthetic_plan(18874, 45, 151643)};
        const BatchReport r = batch_stats(plans);
        CHECK(r.mean_dynamic == doctest::Approx(40.0));
        CHECK(r.line == "18,874 + [40] (12.47%)");
    }
    SUBCASE("bracket-only line when the static part is empty") {
        std::vector<SelectionPlan> plans{synthetic_plan(0, 105, 128000)};
        CHECK(batch_stats(plans).line == "[105] (0.08%)");
    }
    SUBCASE("fixture plan") {
        const SelectionPlan plan =
            select(std::vector<TokenId>{0, 2, 0}, make(8, {3, 4}), 8);
        std::vector<SelectionPlan> plans{plan};
        const BatchReport r = batch_stats(plans);
        CHECK(r.line == "2 + [2] (50.00%)");
        CHECK(r.min_active == 4);
        CHECK(r.max_active == 4);
    }
    SUBCASE("empty stream is an error") {
        CHECK_THROWS_AS(batch_stats({}), ConfigError);
    }
    SUBCASE("mismatched static parts are rejected") {
        PlanStats stats;
        stats.add(synthetic_plan(3, 1, 100));
        CHECK_THROWS_AS(stats.add(synthetic_plan(4, 1, 100)), IntegrityError);
    }
}

TEST_CASE("percentiles use the nearest-rank convention") {
    PlanStats stats;
    for (std::size_t dyn = 1; dyn <= 100; ++dyn) stats.add(synthetic_plan(0, dyn, 1000));
    const BatchReport r = stats.finalize();
    CHECK(r.min_active == 1);
    CHECK(r.p50_active == 50);
    CHECK(r.p90_active == 90);
    CHECK(r.p99_active == 99);
    CHECK(r.max_active == 100);
}

TEST_CASE("union_plans merges micro-batches") {
    const TokenSet statics = make(8, {5});
    std::vector<SelectionPlan> plans{select(std::vector<TokenId>{0}, statics, 8),
                                     select(std::vector<TokenId>{2, 3}, statics, 8)};
    const SelectionPlan u = union_plans(plans);
    CHECK(u.active_ids == std::vector<TokenId>{0, 2, 3, 5});
    CHECK(u.n_static == 1);
    CHECK(u.n_dynamic == 3);
    CHECK_THROWS_AS(union_plans({}), ConfigError);
}

TEST_CASE("coverage: documents missing no dropped token are fully covered") {
    // dropped = candidates \ T; documents whose outputs avoid every dropped
    // token must have all outputs inside the active set.
    std::mt19937_64 rng(0xC07E);
    for (int iter = 0; iter < 60; ++iter) {
        const auto docs = testutil::random_corpus(rng, 64, 40);
        const ProfiledCorpus p = profile(docs, 64);
        FilterConfig cfg;
        cfg.tau = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
        const StaticTaskVocab v = build_static(p, cfg, nullptr);
        const TokenSet dropped = set_difference(p.output_union, v.members);

        for (const Document& d : docs) {
            bool clean = true;
            for (TokenId id : d.output_ids)
                if (dropped.contains(id)) clean = false;
            if (!clean) continue;
            const SelectionPlan plan = select(d.input_ids, v.members, 64);
            const std::set<TokenId> active(plan.active_ids.begin(), plan.active_ids.end());
            for (TokenId id : d.output_ids) CHECK(active.count(id) == 1);
        }
    }
}

TEST_CASE("extraction-style corpora drive the percentage below a tenth of a percent") {
    std::mt19937_64 rng(0xE17A);
    const std::size_t full = 128000;
    std::uniform_int_distribution<TokenId> token(0, static_cast<TokenId>(full - 1));
    PlanStats stats;
    for (int doc = 0; doc < 20; ++doc) {
        std::vector<TokenId> input(100);
        for (auto& id : input) id = token(rng);
        stats.add(select(input, TokenSet(full), full));
    }
    const BatchReport r = stats.finalize();
    CHECK(r.percent_of_full < 0.1);
    CHECK(r.line.front() == '[');
}
