#include "subvocab/selector.hpp"

#include <algorithm>
#include <cmath>

#include "subvocab/error.hpp"

namespace subvocab {

std::optional<std::size_t> SelectionPlan::global_to_local(TokenId id) const {
    auto it = std::lower_bound(active_ids.begin(), active_ids.end(), id);
    if (it == active_ids.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - active_ids.begin());
}

SelectionPlan select(std::span<const TokenId> input_ids, const TokenSet& static_members,
                     std::size_t full_vocab_size) {
    if (static_members.universe_size() != full_vocab_size)
        throw IntegrityError("static vocabulary universe " +
                             std::to_string(static_members.universe_size()) +
                             " does not match full vocabulary size " +
                             std::to_string(full_vocab_size));

    TokenSet active = static_members;
    std::size_t n_dynamic = 0;
    for (TokenId id : input_ids) {
        if (id >= full_vocab_size)
            throw IntegrityError("input token id " + std::to_string(id) +
                                 " out of range for vocabulary of size " +
                                 std::to_string(full_vocab_size));
        if (!active.contains(id)) {
            active.insert(id);
            ++n_dynamic;
        }
    }

    SelectionPlan plan;
    plan.active_ids = active.to_ids();
    plan.n_static = static_members.size();
    plan.n_dynamic = n_dynamic;
    plan.full_vocab_size = full_vocab_size;
    return plan;
}

SelectionPlan select(std::span<const TokenId> input_ids, const StaticTaskVocab& static_vocab,
                     std::size_t full_vocab_size) {
    return select(input_ids, static_vocab.members, full_vocab_size);
}

TokenId remap_out(const SelectionPlan& plan, std::size_t local_id) {
    if (local_id >= plan.active_ids.size())
        throw IntegrityError("local row " + std::to_string(local_id) +
                             " out of range for a plan of " +
                             std::to_string(plan.active_ids.size()) + " rows");
    return plan.active_ids[local_id];
}

SelectionPlan union_plans(std::span<const SelectionPlan> plans) {
    if (plans.empty()) throw ConfigError("cannot union an empty batch of plans");

    const std::size_t full = plans.front().full_vocab_size;
    const std::size_t n_static = plans.front().n_static;
    TokenSet active(full);
    for (const SelectionPlan& p : plans) {
        if (p.full_vocab_size != full || p.n_static != n_static)
            throw IntegrityError("plans in one micro-batch must share the static "
                                 "vocabulary and full vocabulary size");
        for (TokenId id : p.active_ids) active.insert(id);
    }

    SelectionPlan out;
    out.active_ids = active.to_ids();
    out.n_static = n_static;
    out.n_dynamic = out.active_ids.size() - n_static;
    out.full_vocab_size = full;
    return out;
}

namespace {

// Half-up rounding keeps the printed figures reproducible across libcs.
std::uint64_t round_half_up(double x) {
    return static_cast<std::uint64_t>(std::floor(x + 0.5));
}

std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, double percentile) {
    const auto n = static_cast<double>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
    if (rank == 0) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

} // namespace

std::string format_thousands(std::uint64_t value) {
    std::string digits = std::to_string(value);
    std::string out;
    out.reserve(digits.size() + digits.size() / 3);
    const std::size_t first_group = digits.size() % 3 ? digits.size() % 3 : 3;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i >= first_group && (i - first_group) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

std::string format_vocab_line(std::size_t n_static, double mean_dynamic,
                              std::size_t full_vocab_size) {
    const double mean_active = static_cast<double>(n_static) + mean_dynamic;
    const double percent =
        full_vocab_size > 0 ? 100.0 * mean_active / static_cast<double>(full_vocab_size) : 0.0;
    const std::uint64_t cents = round_half_up(percent * 100.0);

    std::string out;
    if (n_static > 0) out += format_thousands(n_static) + " + ";
    out += "[" + format_thousands(round_half_up(mean_dynamic)) + "]";
    out += " (" + std::to_string(cents / 100) + ".";
    const std::uint64_t frac = cents % 100;
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
    out += "%)";
    return out;
}

void PlanStats::add(const SelectionPlan& plan) {
    if (!any_) {
        n_static_ = plan.n_static;
        full_ = plan.full_vocab_size;
        any_ = true;
    } else if (plan.n_static != n_static_ || plan.full_vocab_size != full_) {
        throw IntegrityError("batch statistics require plans sharing the static "
                             "vocabulary and full vocabulary size");
    }
    dynamic_sum_ += plan.n_dynamic;
    active_sizes_.push_back(plan.active_ids.size());
}

BatchReport PlanStats::finalize() const {
    if (!any_) throw ConfigError("batch statistics over an empty stream of plans");

    BatchReport r;
    r.count = active_sizes_.size();
    r.n_static = n_static_;
    r.full_vocab_size = full_;
    r.mean_dynamic = static_cast<double>(dynamic_sum_) / static_cast<double>(r.count);
    r.mean_active = static_cast<double>(n_static_) + r.mean_dynamic;
    r.percent_of_full =
        full_ > 0 ? 100.0 * r.mean_active / static_cast<double>(full_) : 0.0;

    std::vector<std::uint64_t> sorted = active_sizes_;
    std::sort(sorted.begin(), sorted.end());
    r.min_active = sorted.front();
    r.max_active = sorted.back();
    r.p50_active = nearest_rank(sorted, 50.0);
    r.p90_active = nearest_rank(sorted, 90.0);
    r.p99_active = nearest_rank(sorted, 99.0);
    r.line = format_vocab_line(n_static_, r.mean_dynamic, full_);
    return r;
}

BatchReport batch_stats(std::span<const SelectionPlan> plans) {
    PlanStats stats;
    for (const SelectionPlan& p : plans) stats.add(p);
    return stats.finalize();
}

} // namespace subvocab
