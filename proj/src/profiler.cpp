#include "subvocab/profiler.hpp"

#include <algorithm>
#include <unordered_set>

#include "subvocab/error.hpp"

namespace subvocab {

namespace {

void check_ids(std::span<const TokenId> ids, std::size_t vocab_size, std::int64_t doc_index,
               const char* side) {
    for (TokenId id : ids)
        if (id >= vocab_size)
            throw IntegrityError("document " + std::to_string(doc_index) + ": " + side +
                                 " token id " + std::to_string(id) +
                                 " out of range for vocabulary of size " +
                                 std::to_string(vocab_size));
}

// Exact permutation-invariant mean: summing a sorted copy makes the result
// independent of document order despite floating-point non-associativity.
template <typename T>
double sorted_mean(std::vector<T> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (T v : values) sum += static_cast<double>(v);
    return sum / static_cast<double>(values.size());
}

} // namespace

std::vector<std::uint32_t> ProfiledCorpus::per_doc_input_sizes() const {
    std::vector<std::uint32_t> out;
    out.reserve(per_doc.size());
    for (const auto& d : per_doc) out.push_back(d.distinct_input);
    return out;
}

std::vector<double> ProfiledCorpus::per_doc_overlap() const {
    std::vector<double> out;
    out.reserve(per_doc.size());
    for (const auto& d : per_doc) out.push_back(d.overlap_occurrence);
    return out;
}

Profiler::Profiler(std::size_t vocab_size) : input_scratch_(vocab_size) {
    corpus_.vocab_size = vocab_size;
    corpus_.df.assign(vocab_size, 0);
    corpus_.input_union = TokenSet(vocab_size);
    corpus_.output_union = TokenSet(vocab_size);
}

void Profiler::add(const Document& doc) {
    check_ids(doc.input_ids, corpus_.vocab_size, doc.doc_index, "input");
    check_ids(doc.output_ids, corpus_.vocab_size, doc.doc_index, "output");
    if (doc.output_ids.empty())
        throw ParseError("document " + std::to_string(doc.doc_index) +
                         " has an empty output; its overlap ratio is undefined");

    // Distinct input set in a reused scratch bitset.
    touched_.clear();
    for (TokenId id : doc.input_ids) {
        if (!input_scratch_.contains(id)) {
            input_scratch_.insert(id);
            touched_.push_back(id);
            corpus_.input_union.insert(id);
        }
    }

    std::uint64_t copied = 0;
    std::unordered_set<TokenId> seen_output;
    std::uint64_t distinct_copied = 0;
    for (TokenId id : doc.output_ids) {
        if (input_scratch_.contains(id)) ++copied;
        if (seen_output.insert(id).second) {
            // document frequency counts each token once per document
            ++corpus_.df[id];
            corpus_.output_union.insert(id);
            if (input_scratch_.contains(id)) ++distinct_copied;
        }
    }

    ProfiledCorpus::DocStats stats;
    stats.doc_index = doc.doc_index;
    stats.distinct_input = static_cast<std::uint32_t>(touched_.size());
    stats.overlap_occurrence =
        static_cast<double>(copied) / static_cast<double>(doc.output_ids.size());
    stats.overlap_distinct =
        static_cast<double>(distinct_copied) / static_cast<double>(seen_output.size());
    corpus_.per_doc.push_back(stats);
    ++corpus_.doc_count;

    for (TokenId id : touched_) input_scratch_.erase(id);
}

ProfiledCorpus Profiler::finish() && {
    std::sort(corpus_.per_doc.begin(), corpus_.per_doc.end(),
              [](const auto& a, const auto& b) { return a.doc_index < b.doc_index; });
    return std::move(corpus_);
}

ProfiledCorpus Profiler::merge(ProfiledCorpus a, const ProfiledCorpus& b) {
    if (a.vocab_size != b.vocab_size)
        throw IntegrityError("cannot merge profiles over different vocabulary sizes: " +
                             std::to_string(a.vocab_size) + " vs " +
                             std::to_string(b.vocab_size));
    a.doc_count += b.doc_count;
    for (std::size_t v = 0; v < a.df.size(); ++v) a.df[v] += b.df[v];
    a.input_union = set_union(a.input_union, b.input_union);
    a.output_union = set_union(a.output_union, b.output_union);
    a.per_doc.insert(a.per_doc.end(), b.per_doc.begin(), b.per_doc.end());
    std::sort(a.per_doc.begin(), a.per_doc.end(),
              [](const auto& x, const auto& y) { return x.doc_index < y.doc_index; });
    for (std::size_t i = 1; i < a.per_doc.size(); ++i)
        if (a.per_doc[i].doc_index == a.per_doc[i - 1].doc_index)
            throw IntegrityError("duplicate doc_index " +
                                 std::to_string(a.per_doc[i].doc_index) +
                                 " across merged profile shards");
    return a;
}

ProfiledCorpus profile(std::span<const Document> docs, std::size_t vocab_size) {
    Profiler p(vocab_size);
    for (const Document& d : docs) p.add(d);
    return std::move(p).finish();
}

double overlap_ratio(const Document& doc) {
    if (doc.output_ids.empty())
        throw ParseError("document " + std::to_string(doc.doc_index) +
                         " has an empty output; its overlap ratio is undefined");
    std::unordered_set<TokenId> input_set(doc.input_ids.begin(), doc.input_ids.end());
    std::uint64_t copied = 0;
    for (TokenId id : doc.output_ids)
        if (input_set.count(id)) ++copied;
    return static_cast<double>(copied) / static_cast<double>(doc.output_ids.size());
}

double overlap_ratio_distinct(const Document& doc) {
    if (doc.output_ids.empty())
        throw ParseError("document " + std::to_string(doc.doc_index) +
                         " has an empty output; its overlap ratio is undefined");
    std::unordered_set<TokenId> input_set(doc.input_ids.begin(), doc.input_ids.end());
    std::unordered_set<TokenId> output_set(doc.output_ids.begin(), doc.output_ids.end());
    std::uint64_t copied = 0;
    for (TokenId id : output_set)
        if (input_set.count(id)) ++copied;
    return static_cast<double>(copied) / static_cast<double>(output_set.size());
}

OverlapStats locality_report(const ProfiledCorpus& p) {
    if (p.doc_count == 0)
        throw ConfigError("locality report requires a non-empty corpus");

    OverlapStats s;
    s.doc_count = p.doc_count;
    std::vector<double> occ, dis;
    std::vector<std::uint32_t> sizes;
    occ.reserve(p.per_doc.size());
    dis.reserve(p.per_doc.size());
    sizes.reserve(p.per_doc.size());
    for (const auto& d : p.per_doc) {
        occ.push_back(d.overlap_occurrence);
        dis.push_back(d.overlap_distinct);
        sizes.push_back(d.distinct_input);
    }
    s.mean_overlap = sorted_mean(std::move(occ));
    s.mean_overlap_distinct = sorted_mean(std::move(dis));
    s.mean_input_size = sorted_mean(std::move(sizes));
    s.union_input_size = p.input_union.size();
    s.locality_ratio = s.mean_input_size > 0.0
                           ? static_cast<double>(s.union_input_size) / s.mean_input_size
                           : 1.0;
    return s;
}

} // namespace subvocab
