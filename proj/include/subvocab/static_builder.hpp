#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subvocab/profiler.hpp"
#include "subvocab/token_set.hpp"
#include "subvocab/tokenizer.hpp"

namespace subvocab {

// Static-vocabulary filter settings. allowed_blocks holds indices into the
// Unicode block table; nullopt disables language filtering (all blocks).
struct FilterConfig {
    double tau = 0.01;  // fraction of documents allowed to be impacted
    std::optional<std::vector<int>> allowed_blocks;
    bool keep_byte_fragments = true;
    TokenSet always_keep;

    // Resolve block names to table indices. Unknown names raise ConfigError
    // listing the valid names. Matching is loose (case/space/hyphen).
    static std::vector<int> resolve_blocks(std::span<const std::string> names);

    void validate() const;  // tau in [0,1]
};

// Which rule admitted a member token.
enum class Provenance : std::uint8_t {
    Filtered,    // survived all three filter stages
    AlwaysKeep,  // protected token, kept regardless of the filters
};

const char* provenance_name(Provenance p);

// The calibrated static task vocabulary with per-stage bookkeeping.
struct StaticTaskVocab {
    TokenSet members;
    // sizes after each stage: candidates, input-aware, +language, final
    std::array<std::size_t, 4> stage_sizes{};
    std::uint64_t pruned_df_sum = 0;
    double tau = 0.0;
    std::optional<std::vector<int>> allowed_blocks;
    std::vector<TokenId> tolerance_pruned;  // ascending; tokens cut by stage 3
    std::map<TokenId, Provenance> provenance;
};

// Stage 1: drop candidates that appear in the profiled input union.
TokenSet input_aware_filter(const TokenSet& candidates, const TokenSet& input_union);

// Stage 2: keep script-neutral tokens, tokens whose majority block is
// allowed, byte fragments (when configured), and protected tokens. With
// all blocks allowed and byte fragments kept this is the identity and the
// tokenizer may be null.
TokenSet language_filter(const TokenSet& candidates, const FilterConfig& cfg,
                         const Tokenizer* tokenizer);

struct ToleranceResult {
    TokenSet kept;
    std::vector<TokenId> pruned;  // ascending
    std::uint64_t pruned_df_sum = 0;
};

// Stage 3: sort non-protected candidates ascending by (df, id) and prune
// the maximal prefix whose cumulative df stays within tau * M. Protected
// tokens never enter the prune list.
ToleranceResult tolerance_filter(const TokenSet& candidates,
                                 std::span<const std::uint32_t> df, std::int64_t doc_count,
                                 double tau, const TokenSet* always_keep = nullptr);

// Full pipeline over candidates = output union. `input_subtrahend`
// overrides the stage-1 set (used by the per-example compatibility mode);
// by default the corpus-wide input union is subtracted.
StaticTaskVocab build_static(const ProfiledCorpus& p, const FilterConfig& cfg,
                             const Tokenizer* tokenizer,
                             const TokenSet* input_subtrahend = nullptr);

} // namespace subvocab
