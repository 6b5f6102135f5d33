#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subvocab/static_builder.hpp"
#include "subvocab/token_set.hpp"

namespace subvocab {

// One inference instance's active vocabulary S = I_i ∪ T, as the sorted
// global id list plus the global<->local row maps of the reduced LM head.
struct SelectionPlan {
    std::vector<TokenId> active_ids;  // strictly increasing; == local_to_global
    std::size_t n_static = 0;         // |T|
    std::size_t n_dynamic = 0;        // |I_i \ T|
    std::size_t full_vocab_size = 0;

    std::size_t size() const { return active_ids.size(); }
    std::optional<std::size_t> global_to_local(TokenId id) const;
};

// Build the plan for one instance. Throws IntegrityError when an input id
// (or a static member) is not below full_vocab_size.
SelectionPlan select(std::span<const TokenId> input_ids, const TokenSet& static_members,
                     std::size_t full_vocab_size);
SelectionPlan select(std::span<const TokenId> input_ids, const StaticTaskVocab& static_vocab,
                     std::size_t full_vocab_size);

// Decode-side inverse of the gather: local row -> global token id.
TokenId remap_out(const SelectionPlan& plan, std::size_t local_id);

// Micro-batch semantics: the union of several plans (shared static part).
SelectionPlan union_plans(std::span<const SelectionPlan> plans);

struct BatchReport {
    std::size_t count = 0;
    std::size_t n_static = 0;
    double mean_dynamic = 0.0;
    std::size_t full_vocab_size = 0;
    std::uint64_t min_active = 0;
    std::uint64_t max_active = 0;
    std::uint64_t p50_active = 0;
    std::uint64_t p90_active = 0;
    std::uint64_t p99_active = 0;
    double mean_active = 0.0;
    double percent_of_full = 0.0;  // 100 * mean_active / full
    std::string line;              // e.g. "18,874 + [40] (12.47%)"
};

// Accumulates plans one at a time so batch reporting never needs to hold
// every plan in memory. All plans must share n_static and the full size.
class PlanStats {
public:
    void add(const SelectionPlan& plan);
    BatchReport finalize() const;  // throws on an empty stream

private:
    bool any_ = false;
    std::size_t n_static_ = 0;
    std::size_t full_ = 0;
    std::uint64_t dynamic_sum_ = 0;
    std::vector<std::uint64_t> active_sizes_;
};

BatchReport batch_stats(std::span<const SelectionPlan> plans);

// The reporting convention: "<static> + [<mean dynamic>] (<percent>)" with
// thousands separators, the bracket rounded half-up to an integer, and the
// percentage of the full vocabulary rounded half-up to two decimals. An
// empty static part collapses to "[<mean dynamic>] (<percent>)".
std::string format_vocab_line(std::size_t n_static, double mean_dynamic,
                              std::size_t full_vocab_size);

std::string format_thousands(std::uint64_t value);

} // namespace subvocab
