#include "doctest.h"

#include <random>

#include "subvocab/artifacts.hpp"
#include "subvocab/error.hpp"

#include "test_helpers.hpp"

using namespace subvocab;
using nlohmann::json;

TEST_CASE("profile JSON round-trips") {
    std::mt19937_64 rng(0xA27);
    const auto docs = testutil::random_corpus(rng, 32, 40);
    const ProfiledCorpus p = profile(docs, 32);

    const json doc = artifacts::to_json(p);
    const ProfiledCorpus back = artifacts::profile_from_json(doc, "<mem>");
    CHECK(artifacts::to_json(back) == doc);
    CHECK(back.input_union == p.input_union);
    CHECK(back.df == p.df);
}

TEST_CASE("static vocabulary JSON round-trips") {
    std::mt19937_64 rng(0xB28);
    const auto docs = testutil::random_corpus(rng, 32, 40);
    const ProfiledCorpus p = profile(docs, 32);
    FilterConfig cfg;
    cfg.tau = 0.25;
    TokenSet keep(32);
    keep.insert(0);
    cfg.always_keep = keep;
    const StaticTaskVocab v = build_static(p, cfg, nullptr);

    const json doc = artifacts::to_json(v);
    const StaticTaskVocab back = artifacts::static_from_json(doc, "<mem>");
    CHECK(artifacts::to_json(back) == doc);
    CHECK(back.members == v.members);
    CHECK(back.tolerance_pruned == v.tolerance_pruned);
    CHECK(back.provenance == v.provenance);
}

TEST_CASE("plan JSON round-trips and validates") {
    SelectionPlan plan;
    plan.active_ids = {0, 2, 3, 4};
    plan.n_static = 2;
    plan.n_dynamic = 2;
    plan.full_vocab_size = 8;
    const json doc = artifacts::to_json(plan);
    const SelectionPlan back = artifacts::plan_from_json(doc, "<mem>");
    CHECK(back.active_ids == plan.active_ids);

    json bad = doc;
    bad["active_ids"] = {2, 2};
    CHECK_THROWS_AS(artifacts::plan_from_json(bad, "<mem>"), IntegrityError);
    bad["active_ids"] = {2, 9};
    CHECK_THROWS_AS(artifacts::plan_from_json(bad, "<mem>"), IntegrityError);
    bad = doc;
    bad.erase("n_static");
    CHECK_THROWS_WITH_AS(artifacts::plan_from_json(bad, "plan.json"),
                         doctest::Contains("plan.json"), ParseError);
}

TEST_CASE("hardware JSON validates on load") {
    const HardwareModel hw{1e9, 1e12, 1e-8};
    const HardwareModel back = artifacts::hardware_from_json(artifacts::to_json(hw), "<mem>");
    CHECK(back.link_bandwidth == hw.link_bandwidth);

    json bad = artifacts::to_json(hw);
    bad["device_flops"] = 0.0;
    CHECK_THROWS_AS(artifacts::hardware_from_json(bad, "<mem>"), ConfigError);
}

TEST_CASE("save and load are inverse and deterministic") {
    testutil::TempDir dir("artifacts");
    const json doc{{"b", 1}, {"a", {1, 2, 3}}};
    artifacts::save_json(doc, dir.file("x.json"));
    CHECK(artifacts::load_json(dir.file("x.json")) == doc);
    const std::string first = testutil::read_file(dir.file("x.json"));
    artifacts::save_json(doc, dir.file("x.json"));
    CHECK(testutil::read_file(dir.file("x.json")) == first);
    CHECK_THROWS_AS(artifacts::load_json(dir.file("missing.json")), ParseError);
}
