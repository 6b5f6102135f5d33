#include "subvocab/static_builder.hpp"

#include <algorithm>
#include <sstream>

#include "subvocab/error.hpp"
#include "subvocab/unicode.hpp"

namespace subvocab {

std::vector<int> FilterConfig::resolve_blocks(std::span<const std::string> names) {
    std::vector<int> out;
    out.reserve(names.size());
    for (const std::string& name : names) {
        const auto idx = unicode::find_block(name);
        if (!idx) {
            std::ostringstream msg;
            msg << "unknown Unicode block \"" << name << "\"; valid names (Unicode "
                << unicode::version() << "):";
            for (auto n : unicode::all_block_names()) msg << "\n  " << n;
            throw ConfigError(msg.str());
        }
        out.push_back(*idx);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void FilterConfig::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ConfigError("tau must lie in [0, 1]; got " + std::to_string(tau));
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Filtered: return "filtered";
        case Provenance::AlwaysKeep: return "always_keep";
    }
    return "?";
}

TokenSet input_aware_filter(const TokenSet& candidates, const TokenSet& input_union) {
    return set_difference(candidates, input_union);
}

TokenSet language_filter(const TokenSet& candidates, const FilterConfig& cfg,
                         const Tokenizer* tokenizer) {
    const bool all_blocks = !cfg.allowed_blocks.has_value();
    if (all_blocks && cfg.keep_byte_fragments) return candidates;  // identity configuration
    if (!tokenizer)
        throw ConfigError("language filtering needs a tokenizer for script classification");

    TokenSet kept(candidates.universe_size());
    candidates.for_each([&](TokenId id) {
        if (cfg.always_keep.universe_size() > 0 && cfg.always_keep.contains(id)) {
            kept.insert(id);
            return;
        }
        const ScriptClass sc = tokenizer->classify_script(id);
        switch (sc.kind) {
            case ScriptClass::Kind::AllowedNeutral:
                kept.insert(id);
                break;
            case ScriptClass::Kind::ByteFragment:
                if (cfg.keep_byte_fragments) kept.insert(id);
                break;
            case ScriptClass::Kind::Block:
                if (all_blocks ||
                    std::binary_search(cfg.allowed_blocks->begin(), cfg.allowed_blocks->end(),
                                       sc.block))
                    kept.insert(id);
                break;
        }
    });
    return kept;
}

ToleranceResult tolerance_filter(const TokenSet& candidates,
                                 std::span<const std::uint32_t> df, std::int64_t doc_count,
                                 double tau, const TokenSet* always_keep) {
    if (doc_count < 1)
        throw ConfigError("tolerance filtering requires at least one profiled document");

    auto df_of = [&](TokenId id) -> std::uint64_t {
        return id < df.size() ? df[id] : 0;  // absent means never seen
    };

    ToleranceResult res;
    res.kept = TokenSet(candidates.universe_size());

    std::vector<TokenId> prunable;
    prunable.reserve(candidates.size());
    candidates.for_each([&](TokenId id) {
        if (always_keep && always_keep->universe_size() > 0 && always_keep->contains(id))
            res.kept.insert(id);  // protected, never pruned
        else
            prunable.push_back(id);
    });

    // Ascending by document frequency, ties by id for determinism.
    std::sort(prunable.begin(), prunable.end(), [&](TokenId a, TokenId b) {
        return df_of(a) != df_of(b) ? df_of(a) < df_of(b) : a < b;
    });

    const double budget = tau * static_cast<double>(doc_count);
    std::uint64_t cumulative = 0;
    std::size_t cut = 0;  // prefix [0, cut) is pruned
    while (cut < prunable.size()) {
        const std::uint64_t next = cumulative + df_of(prunable[cut]);
        if (static_cast<double>(next) > budget) break;
        cumulative = next;
        ++cut;
    }

    res.pruned.assign(prunable.begin(), prunable.begin() + cut);
    std::sort(res.pruned.begin(), res.pruned.end());
    res.pruned_df_sum = cumulative;
    for (std::size_t i = cut; i < prunable.size(); ++i) res.kept.insert(prunable[i]);
    return res;
}

StaticTaskVocab build_static(const ProfiledCorpus& p, const FilterConfig& cfg,
                             const Tokenizer* tokenizer,
                             const TokenSet* input_subtrahend) {
    cfg.validate();
    if (p.doc_count < 1)
        throw ConfigError("cannot build a static vocabulary from an empty profile");
    if (cfg.always_keep.universe_size() > 0 && cfg.always_keep.universe_size() != p.vocab_size)
        throw IntegrityError("always_keep universe " +
                             std::to_string(cfg.always_keep.universe_size()) +
                             " does not match the profile vocabulary size " +
                             std::to_string(p.vocab_size));
    if (tokenizer && tokenizer->table().size() != p.vocab_size)
        throw IntegrityError("profile vocabulary size " + std::to_string(p.vocab_size) +
                             " disagrees with the tokenizer's " +
                             std::to_string(tokenizer->table().size()));

    const TokenSet& candidates = p.output_union;
    const TokenSet& subtract = input_subtrahend ? *input_subtrahend : p.input_union;

    const TokenSet v1 = input_aware_filter(candidates, subtract);
    const TokenSet v2 = language_filter(v1, cfg, tokenizer);
    ToleranceResult tol =
        tolerance_filter(v2, p.df, p.doc_count, cfg.tau,
                         cfg.always_keep.universe_size() > 0 ? &cfg.always_keep : nullptr);

    StaticTaskVocab out;
    out.tau = cfg.tau;
    out.allowed_blocks = cfg.allowed_blocks;
    out.members = cfg.always_keep.universe_size() > 0 ? set_union(tol.kept, cfg.always_keep)
                                                      : std::move(tol.kept);
    out.tolerance_pruned = std::move(tol.pruned);
    out.pruned_df_sum = tol.pruned_df_sum;
    out.stage_sizes = {candidates.size(), v1.size(), v2.size(), out.members.size()};

    if (static_cast<double>(out.pruned_df_sum) > cfg.tau * static_cast<double>(p.doc_count))
        throw IntegrityError("tolerance guarantee violated: pruned df sum " +
                             std::to_string(out.pruned_df_sum) + " exceeds tau*M");

    out.members.for_each([&](TokenId id) {
        const bool protected_id =
            cfg.always_keep.universe_size() > 0 && cfg.always_keep.contains(id);
        out.provenance.emplace(id, protected_id ? Provenance::AlwaysKeep
                                                : Provenance::Filtered);
    });
    return out;
}

} // namespace subvocab
