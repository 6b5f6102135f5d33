#include "doctest.h"

#include <cstring>
#include <random>

#include "subvocab/error.hpp"
#include "subvocab/head.hpp"
#include "subvocab/selector.hpp"

#include "test_helpers.hpp"

using namespace subvocab;

namespace {

SelectionPlan plan_of(std::vector<TokenId> ids, std::size_t full) {
    SelectionPlan p;
    p.active_ids = std::move(ids);
    p.n_static = 0;
    p.n_dynamic = p.active_ids.size();
    p.full_vocab_size = full;
    return p;
}

std::vector<float> random_hidden(std::mt19937_64& rng, std::size_t dim) {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> h(dim);
    for (float& v : h) v = dist(rng);
    return h;
}

bool bitwise_equal(float a, float b) {
    std::uint32_t ua, ub;
    std::memcpy(&ua, &a, 4);
    std::memcpy(&ub, &b, 4);
    return ua == ub;
}

} // namespace

TEST_CASE("gather copies the named rows exactly") {
    const HeadMatrix head = HeadMatrix::random(8, 4, 1234);
    const SelectionPlan plan = plan_of({0, 2, 3, 4}, 8);
    const HeadMatrix sub = gather(head, plan);

    REQUIRE(sub.rows() == 4);
    REQUIRE(sub.dim() == 4);
    for (std::size_t k = 0; k < plan.active_ids.size(); ++k)
        for (std::size_t c = 0; c < 4; ++c)
            CHECK(bitwise_equal(sub.at(k, c), head.at(plan.active_ids[k], c)));
}

TEST_CASE("identity and empty gathers") {
    const HeadMatrix head = HeadMatrix::random(6, 3, 9);
    CHECK(gather(head, plan_of({0, 1, 2, 3, 4, 5}, 6)) == head);
    CHECK(gather(head, plan_of({}, 6)).rows() == 0);
    CHECK_THROWS_AS(gather(head, plan_of({6}, 8)), IntegrityError);
}

TEST_CASE("logits basics") {
    HeadMatrix head(2, 1, 4);
    head.at(0, 0) = 2.0f;
    head.at(1, 0) = 3.0f;
    CHECK(logits(head, std::vector<float>{5.0f}) == std::vector<float>{10.0f, 15.0f});

    const HeadMatrix r = HeadMatrix::random(4, 8, 7);
    const std::vector<float> zero(8, 0.0f);
    for (float v : logits(r, zero)) CHECK(v == 0.0f);

    CHECK_THROWS_AS(logits(r, std::vector<float>{1.0f}), IntegrityError);
}

TEST_CASE("sub-head logits equal full-head logits at mapped indices, bitwise") {
    std::mt19937_64 rng(0x10617);
    std::uniform_int_distribution<std::size_t> rows_dist(1, 32);
    std::uniform_int_distribution<std::size_t> dim_dist(1, 16);
    for (int iter = 0; iter < 500; ++iter) {
        const std::size_t rows = rows_dist(rng), dim = dim_dist(rng);
        const HeadMatrix head = HeadMatrix::random(rows, dim, rng());

        std::vector<TokenId> picked;
        for (TokenId r = 0; r < rows; ++r)
            if (rng() & 1) picked.push_back(r);
        const SelectionPlan plan = plan_of(std::move(picked), rows);

        const auto hidden = random_hidden(rng, dim);
        const auto full = logits(head, hidden);
        const auto sub = logits(gather(head, plan), hidden);
        REQUIRE(sub.size() == plan.active_ids.size());
        for (std::size_t k = 0; k < sub.size(); ++k)
            CHECK(bitwise_equal(sub[k], full[plan.active_ids[k]]));
    }
}

TEST_CASE("greedy step decodes through the plan") {
    HeadMatrix sub(3, 1, 4);
    sub.at(0, 0) = 1.0f;
    sub.at(1, 0) = 3.0f;
    sub.at(2, 0) = 2.0f;
    const SelectionPlan plan = plan_of({0, 2, 4}, 8);
    CHECK(greedy_step(sub, std::vector<float>{1.0f}, plan) == 2);

    // ties break toward the lowest local row -> lowest global id
    HeadMatrix flat(3, 1, 4);
    flat.at(0, 0) = flat.at(1, 0) = flat.at(2, 0) = 1.0f;
    CHECK(greedy_step(flat, std::vector<float>{1.0f}, plan) == 0);

    CHECK_THROWS_AS(greedy_step(HeadMatrix(0, 1, 4), std::vector<float>{1.0f},
                                plan_of({}, 8)),
                    IntegrityError);
}

TEST_CASE("greedy step agrees with the full head whenever its argmax is in the plan") {
    std::mt19937_64 rng(0xA26A);
    for (int iter = 0; iter < 300; ++iter) {
        const std::size_t rows = 16, dim = 8;
        const HeadMatrix head = HeadMatrix::random(rows, dim, rng());
        std::vector<TokenId> picked;
        for (TokenId r = 0; r < rows; ++r)
            if (rng() & 1) picked.push_back(r);
        if (picked.empty()) continue;
        const SelectionPlan plan = plan_of(std::move(picked), rows);

        const auto hidden = random_hidden(rng, dim);
        const auto full = logits(head, hidden);
        std::size_t full_arg = 0;
        for (std::size_t r = 1; r < rows; ++r)
            if (full[r] > full[full_arg]) full_arg = r;

        const TokenId got = greedy_step(gather(head, plan), hidden, plan);
        if (plan.global_to_local(static_cast<TokenId>(full_arg)))
            CHECK(got == full_arg);
    }
}

TEST_CASE("memory report arithmetic") {
    SUBCASE("information-extraction shape") {
        const MemoryReport r = memory_report(128000, 2048, 2, 105);
        CHECK(r.sub_head_bytes == 430080);
        CHECK(r.full_head_bytes == 524288000ULL);
        CHECK(r.embedding_bytes_gpu == 0);
        CHECK(r.embedding_bytes_host == 524288000ULL);
        CHECK(r.saved_fraction > 0.99);
    }
    SUBCASE("full plan still saves the embedding half") {
        CHECK(memory_report(1000, 64, 4, 1000).saved_fraction == 0.5);
    }
    SUBCASE("empty plan saves everything") {
        CHECK(memory_report(1000, 64, 4, 0).saved_fraction == 1.0);
    }
    SUBCASE("monotone decreasing in plan size") {
        double last = 1.1;
        for (std::size_t plan = 0; plan <= 1000; plan += 100) {
            const double saved = memory_report(1000, 64, 2, plan).saved_fraction;
            CHECK(saved < last);
            last = saved;
        }
    }
    SUBCASE("bad dtype is rejected") {
        CHECK_THROWS_AS(memory_report(10, 10, 3, 1), ConfigError);
    }
}

TEST_CASE("weight files round-trip bit-exactly") {
    testutil::TempDir dir("head_io");

    SUBCASE("float32") {
        const HeadMatrix m = HeadMatrix::random(16, 8, 42, 4);
        m.save(dir.file("w.bin"));
        CHECK(HeadMatrix::load(dir.file("w.bin")) == m);
    }
    SUBCASE("float16") {
        const HeadMatrix m = HeadMatrix::random(16, 8, 42, 2);
        m.save(dir.file("w16.bin"));
        const HeadMatrix back = HeadMatrix::load(dir.file("w16.bin"));
        CHECK(back == m);  // random() quantizes through half precision
        CHECK(back.dtype_bytes() == 2);
    }
    SUBCASE("bad magic is a parse error") {
        testutil::write_file(dir.file("junk.bin"), "definitely not a weight file");
        CHECK_THROWS_AS(HeadMatrix::load(dir.file("junk.bin")), ParseError);
    }
}

TEST_CASE("half conversion round-trips every non-NaN pattern") {
    for (std::uint32_t h = 0; h <= 0xFFFF; ++h) {
        const std::uint16_t half = static_cast<std::uint16_t>(h);
        const bool is_nan = ((half >> 10) & 0x1F) == 0x1F && (half & 0x3FF) != 0;
        if (is_nan) continue;
        CHECK(float_to_half(half_to_float(half)) == half);
    }
    CHECK(half_to_float(0x3C00) == 1.0f);
    CHECK(half_to_float(0xC000) == -2.0f);
    CHECK(float_to_half(0.5f) == 0x3800);
}
