#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "subvocab/token_set.hpp"
#include "subvocab/vocab.hpp"

namespace subvocab {

// Corpus-level statistics collected in one streaming pass: document count,
// per-token document frequency over outputs, input/output unions, and
// per-document input size / copy-overlap figures.
struct ProfiledCorpus {
    std::size_t vocab_size = 0;
    std::int64_t doc_count = 0;                 // M
    std::vector<std::uint32_t> df;              // dense; df[v] = |{i : v in O_i}|
    TokenSet input_union;
    TokenSet output_union;

    struct DocStats {
        std::int64_t doc_index = 0;
        std::uint32_t distinct_input = 0;       // |I_i|
        double overlap_occurrence = 0.0;        // output occurrences copied from input
        double overlap_distinct = 0.0;          // distinct output tokens copied from input
    };
    std::vector<DocStats> per_doc;              // ordered by doc_index

    std::vector<std::uint32_t> per_doc_input_sizes() const;
    std::vector<double> per_doc_overlap() const;
};

struct OverlapStats {
    std::int64_t doc_count = 0;
    double mean_overlap = 0.0;                  // occurrence-level
    double mean_overlap_distinct = 0.0;         // type-level variant
    double mean_input_size = 0.0;
    std::size_t union_input_size = 0;
    double locality_ratio = 1.0;                // union_input_size / mean_input_size
};

// Streaming accumulator. add() validates ids against the vocabulary size
// and rejects documents with empty outputs (their overlap is undefined);
// errors name the offending doc_index.
class Profiler {
public:
    explicit Profiler(std::size_t vocab_size);

    void add(const Document& doc);
    std::int64_t doc_count() const { return corpus_.doc_count; }

    // Canonicalizes per-document stats by doc_index and returns the result.
    ProfiledCorpus finish() &&;

    // Shard merge: df adds, unions union, per-document lists concatenate and
    // re-sort by doc_index. Associative and commutative.
    static ProfiledCorpus merge(ProfiledCorpus a, const ProfiledCorpus& b);

private:
    ProfiledCorpus corpus_;
    TokenSet input_scratch_;
    std::vector<TokenId> touched_;
};

ProfiledCorpus profile(std::span<const Document> docs, std::size_t vocab_size);

// Fraction of output token occurrences whose id appears in the input's
// distinct-token set. Throws on empty output.
double overlap_ratio(const Document& doc);
// Type-level variant: fraction of distinct output tokens found in the input.
double overlap_ratio_distinct(const Document& doc);

// Aggregates over a non-empty profile. Means are computed over value-sorted
// copies so they are exactly invariant under document permutation.
OverlapStats locality_report(const ProfiledCorpus& p);

} // namespace subvocab
