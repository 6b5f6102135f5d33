#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "subvocab/artifacts.hpp"
#include "subvocab/corpus_io.hpp"
#include "subvocab/error.hpp"
#include "subvocab/head.hpp"
#include "subvocab/offload_sim.hpp"
#include "subvocab/profiler.hpp"
#include "subvocab/selector.hpp"
#include "subvocab/static_builder.hpp"
#include "subvocab/tokenizer.hpp"
#include "subvocab/unicode.hpp"

namespace {

using namespace subvocab;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kConfigEnvVar = "SUBVOCAB_CONFIG";

// ---- pipeline config file -------------------------------------------------

// Optional JSON config supplying defaults for the shared flags; explicit
// flags always win. Located via --config or the SUBVOCAB_CONFIG variable.
struct PipelineDefaults {
    std::optional<std::string> tokenizer;
    std::optional<std::string> corpus;
    std::optional<double> tau;
    std::optional<std::vector<std::string>> blocks;
    std::optional<std::vector<std::string>> keep;
    std::optional<std::string> output_dir;
    std::optional<std::string> format;
};

PipelineDefaults load_defaults(const std::string& path) {
    PipelineDefaults d;
    const json doc = artifacts::load_json(path);
    if (!doc.is_object()) throw ConfigError(path + ": config must be a JSON object");
    auto get_str = [&](const char* key) -> std::optional<std::string> {
        if (!doc.contains(key)) return std::nullopt;
        return doc[key].get<std::string>();
    };
    d.tokenizer = get_str("tokenizer");
    d.corpus = get_str("corpus");
    d.output_dir = get_str("output_dir");
    d.format = get_str("format");
    if (doc.contains("tau")) d.tau = doc["tau"].get<double>();
    if (doc.contains("blocks")) {
        if (doc["blocks"].is_string())
            d.blocks = std::vector<std::string>{doc["blocks"].get<std::string>()};
        else
            d.blocks = doc["blocks"].get<std::vector<std::string>>();
    }
    if (doc.contains("keep")) d.keep = doc["keep"].get<std::vector<std::string>>();
    return d;
}

// ---- shared option plumbing -------------------------------------------------

enum class Format { Text, Json, Csv };

Format parse_format(const std::string& name) {
    if (name == "text") return Format::Text;
    if (name == "json") return Format::Json;
    if (name == "csv") return Format::Csv;
    throw ConfigError("unknown format \"" + name + "\"; expected text, json or csv");
}

void flatten_csv(const json& doc, const std::string& prefix, std::ostream& out) {
    if (doc.is_object()) {
        for (const auto& [key, value] : doc.items())
            flatten_csv(value, prefix.empty() ? key : prefix + "." + key, out);
    } else if (doc.is_array()) {
        std::ostringstream joined;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (i) joined << ';';
            joined << doc[i].dump();
        }
        out << prefix << "," << joined.str() << "\n";
    } else {
        out << prefix << "," << doc.dump() << "\n";
    }
}

// Every command prints either its text rendering or the summary document.
void emit(Format format, const json& summary, const std::string& text) {
    switch (format) {
        case Format::Text: std::cout << text; break;
        case Format::Json: std::cout << summary.dump(2) << "\n"; break;
        case Format::Csv: flatten_csv(summary, "", std::cout); break;
    }
}

std::optional<Tokenizer> maybe_load_tokenizer(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return Tokenizer::load(path);
}

fs::path out_path(const std::string& output_dir, const std::string& explicit_path,
                  const char* default_name) {
    if (!explicit_path.empty()) return explicit_path;
    fs::path dir = output_dir.empty() ? fs::path(".") : fs::path(output_dir);
    fs::create_directories(dir);
    return dir / default_name;
}

std::string unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            ++i;
            switch (s[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '\\': out.push_back('\\'); break;
                default: out.push_back('\\'); out.push_back(s[i]);
            }
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

// --keep entries: "id:<n>" or a token surface (optionally "text:<s>", with
// \n \t \r \\ escapes). Defaults always include the tokenizer's specials.
TokenSet build_always_keep(const std::vector<std::string>& keeps, const Tokenizer* tokenizer,
                           std::size_t vocab_size) {
    TokenSet out(vocab_size);
    if (tokenizer) tokenizer->special_ids().for_each([&](TokenId id) { out.insert(id); });
    for (const std::string& spec : keeps) {
        if (spec.rfind("id:", 0) == 0) {
            std::uint64_t id = 0;
            try {
                id = std::stoull(spec.substr(3));
            } catch (const std::exception&) {
                throw ConfigError("--keep " + spec + ": malformed token id");
            }
            if (id >= vocab_size)
                throw ConfigError("--keep " + spec + ": id out of range for vocabulary of size " +
                                  std::to_string(vocab_size));
            out.insert(static_cast<TokenId>(id));
            continue;
        }
        const std::string text =
            unescape(spec.rfind("text:", 0) == 0 ? spec.substr(5) : spec);
        if (!tokenizer)
            throw ConfigError("--keep \"" + spec + "\" needs a tokenizer to resolve the surface");
        const auto id = tokenizer->table().find_surface(text);
        if (!id)
            throw ConfigError("--keep \"" + spec + "\" is not a token surface in this vocabulary");
        out.insert(*id);
    }
    return out;
}

// Split repeatable, comma-separated --blocks values; "all" disables the filter.
std::optional<std::vector<int>> resolve_block_args(const std::vector<std::string>& args) {
    std::vector<std::string> names;
    for (const std::string& arg : args) {
        std::stringstream ss(arg);
        std::string part;
        while (std::getline(ss, part, ',')) {
            while (!part.empty() && part.front() == ' ') part.erase(part.begin());
            while (!part.empty() && part.back() == ' ') part.pop_back();
            if (part.empty()) continue;
            if (part == "all") return std::nullopt;
            names.push_back(part);
        }
    }
    if (names.empty()) return std::nullopt;
    return FilterConfig::resolve_blocks(names);
}

std::string percent(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << fraction * 100.0 << "%";
    return os.str();
}

// ---- profile ----------------------------------------------------------------

struct ProfileOpts {
    std::string corpus, tokenizer, out, output_dir;
    std::optional<std::size_t> vocab_size;
    unsigned threads = 1;
    Format format = Format::Text;
};

int run_profile(const ProfileOpts& opt) {
    const auto tokenizer = maybe_load_tokenizer(opt.tokenizer);
    const ProfiledCorpus p = profile_corpus_file(
        opt.corpus, tokenizer ? &*tokenizer : nullptr, opt.vocab_size, opt.threads);
    if (p.doc_count == 0) throw ConfigError("empty corpus: " + opt.corpus);

    const fs::path out = out_path(opt.output_dir, opt.out, "profile.json");
    artifacts::save_json(artifacts::to_json(p), out);

    const OverlapStats stats = locality_report(p);
    json summary{{"profile", out.string()},
                 {"M", p.doc_count},
                 {"vocab_size", p.vocab_size},
                 {"input_union_size", p.input_union.size()},
                 {"output_union_size", p.output_union.size()},
                 {"stats", artifacts::to_json(stats)}};

    std::ostringstream text;
    text << "profiled " << p.doc_count << " documents over a vocabulary of "
         << p.vocab_size << "\n"
         << "  input union          : " << p.input_union.size() << " tokens\n"
         << "  output union         : " << p.output_union.size() << " tokens\n"
         << "  mean |I_i|           : " << stats.mean_input_size << "\n"
         << "  locality ratio       : " << stats.locality_ratio << "x (union over mean input)\n"
         << "  overlap (occurrence) : " << stats.mean_overlap << "\n"
         << "  overlap (distinct)   : " << stats.mean_overlap_distinct << "\n";
    if (p.per_doc.size() <= 32) {
        for (const auto& d : p.per_doc)
            text << "  doc " << d.doc_index << ": |I|=" << d.distinct_input
                 << " overlap=" << d.overlap_occurrence
                 << " distinct=" << d.overlap_distinct << "\n";
    }
    text << "wrote " << out.string() << "\n";
    emit(opt.format, summary, text.str());
    return 0;
}

// ---- build-static -------------------------------------------------------------

struct BuildStaticOpts {
    std::string profile, tokenizer, corpus, out, output_dir;
    std::vector<double> taus;
    std::vector<std::string> blocks;
    std::vector<std::string> keep;
    bool drop_byte_fragments = false;
    std::optional<std::int64_t> compat_per_example;
    Format format = Format::Text;
};

std::string tau_label(double tau) {
    std::ostringstream os;
    os << tau;
    return os.str();
}

int run_build_static(const BuildStaticOpts& opt) {
    const auto tokenizer = maybe_load_tokenizer(opt.tokenizer);
    const Tokenizer* tok = tokenizer ? &*tokenizer : nullptr;
    const ProfiledCorpus p =
        artifacts::profile_from_json(artifacts::load_json(opt.profile), opt.profile);

    FilterConfig cfg;
    cfg.allowed_blocks = resolve_block_args(opt.blocks);
    cfg.keep_byte_fragments = !opt.drop_byte_fragments;
    cfg.always_keep = build_always_keep(opt.keep, tok, p.vocab_size);

    // Study-only reading of the input-aware stage: subtract one example's
    // input set instead of the corpus union.
    std::optional<TokenSet> subtrahend;
    if (opt.compat_per_example) {
        if (opt.corpus.empty())
            throw ConfigError("--compat-per-example-ia needs --corpus to fetch the example");
        CorpusReader reader(opt.corpus);
        while (auto rec = reader.next()) {
            if (rec->index != *opt.compat_per_example) continue;
            const Document doc = to_document(*rec, tok, /*require_output=*/false);
            subtrahend = TokenSet::from_ids(p.vocab_size, doc.input_ids);
            break;
        }
        if (!subtrahend)
            throw ConfigError("corpus has no document with index " +
                              std::to_string(*opt.compat_per_example));
    }

    std::vector<double> taus = opt.taus.empty() ? std::vector<double>{0.01} : opt.taus;
    if (taus.size() > 1 && !opt.out.empty())
        throw ConfigError("--out only applies to a single --tau; use --output-dir for sweeps");

    json summary = json::array();
    std::ostringstream text;
    for (double tau : taus) {
        cfg.tau = tau;
        const StaticTaskVocab v =
            build_static(p, cfg, tok, subtrahend ? &*subtrahend : nullptr);

        fs::path out;
        if (taus.size() == 1) {
            out = out_path(opt.output_dir, opt.out, "static.json");
        } else {
            const std::string name = "static.tau" + tau_label(tau) + ".json";
            out = out_path(opt.output_dir, "", name.c_str());
        }
        artifacts::save_json(artifacts::to_json(v), out);

        const double vs = static_cast<double>(p.vocab_size);
        json entry{{"tau", tau},
                   {"stage_sizes", v.stage_sizes},
                   {"members", v.members.size()},
                   {"pruned", v.tolerance_pruned.size()},
                   {"pruned_df_sum", v.pruned_df_sum},
                   {"file", out.string()}};
        summary.push_back(entry);

        text << "stage sizes (tau=" << tau_label(tau) << "):\n"
             << "  candidates (output union) : " << v.stage_sizes[0] << "  ("
             << percent(v.stage_sizes[0] / vs) << " of vocab)\n"
             << "  input-aware               : " << v.stage_sizes[1] << "  ("
             << percent(v.stage_sizes[1] / vs) << ")\n"
             << "  + language-specific       : " << v.stage_sizes[2] << "  ("
             << percent(v.stage_sizes[2] / vs) << ")\n"
             << "  final static vocabulary   : " << v.stage_sizes[3] << "  ("
             << percent(v.stage_sizes[3] / vs) << ")\n"
             << "pruned " << v.tolerance_pruned.size() << " tokens (df sum "
             << v.pruned_df_sum << " <= tau*M " << tau * static_cast<double>(p.doc_count)
             << ")\n"
             << "wrote " << out.string() << "\n";
    }
    emit(opt.format, taus.size() == 1 ? summary[0] : summary, text.str());
    return 0;
}

// ---- select -------------------------------------------------------------------

struct SelectOpts {
    std::string static_path, tokenizer, text, inputs, out, plans_out, stats_out, output_dir;
    std::optional<std::size_t> full_size;
    bool write_union = false;
    Format format = Format::Text;
};

std::size_t resolve_full_size(const std::optional<std::size_t>& from_static,
                              const Tokenizer* tok,
                              const std::optional<std::size_t>& flag) {
    std::optional<std::size_t> size = from_static;
    if (tok) {
        if (size && *size != tok->table().size())
            throw IntegrityError("static vocabulary size " + std::to_string(*size) +
                                 " disagrees with the tokenizer's " +
                                 std::to_string(tok->table().size()));
        size = tok->table().size();
    }
    if (flag) {
        if (size && *size != *flag)
            throw ConfigError("--full-size " + std::to_string(*flag) +
                              " disagrees with the loaded artifacts (" +
                              std::to_string(*size) + ")");
        size = flag;
    }
    if (!size)
        throw ConfigError("full vocabulary size unknown: pass --static, --tokenizer or "
                          "--full-size");
    return *size;
}

int run_select(const SelectOpts& opt) {
    const auto tokenizer = maybe_load_tokenizer(opt.tokenizer);
    const Tokenizer* tok = tokenizer ? &*tokenizer : nullptr;

    std::optional<StaticTaskVocab> static_vocab;
    std::optional<std::size_t> static_size;
    if (!opt.static_path.empty()) {
        static_vocab = artifacts::static_from_json(artifacts::load_json(opt.static_path),
                                                   opt.static_path);
        static_size = static_vocab->members.universe_size();
    }
    const std::size_t full = resolve_full_size(static_size, tok, opt.full_size);
    const TokenSet members = static_vocab ? static_vocab->members : TokenSet(full);

    if (opt.text.empty() == opt.inputs.empty())
        throw ConfigError("pass exactly one of --text or --inputs");

    PlanStats stats;
    json summary;
    std::ostringstream text;

    if (!opt.text.empty()) {
        if (!tok) throw ConfigError("--text needs a tokenizer");
        const std::vector<TokenId> ids = tok->encode(opt.text);
        const SelectionPlan plan = select(ids, members, full);
        const fs::path out = out_path(opt.output_dir, opt.out, "plan.json");
        artifacts::save_json(artifacts::to_json(plan), out);
        stats.add(plan);
        const BatchReport report = stats.finalize();
        summary = json{{"plan", out.string()}, {"report", artifacts::to_json(report)}};
        text << report.line << "\n"
             << "active rows: " << plan.active_ids.size() << " of " << full << "\n"
             << "wrote " << out.string() << "\n";
    } else {
        CorpusReader reader(opt.inputs);
        const fs::path plans_out = out_path(opt.output_dir, opt.plans_out, "plans.jsonl");
        std::ofstream plans_file(plans_out, std::ios::binary);
        if (!plans_file)
            throw ParseError("cannot open " + plans_out.string() + " for writing");

        std::vector<SelectionPlan> for_union;
        std::size_t count = 0;
        while (auto rec = reader.next()) {
            const Document doc = to_document(*rec, tok, /*require_output=*/false);
            SelectionPlan plan = select(doc.input_ids, members, full);
            plans_file << artifacts::to_json(plan).dump() << "\n";
            stats.add(plan);
            if (opt.write_union) for_union.push_back(std::move(plan));
            ++count;
        }
        if (count == 0) throw ConfigError("empty corpus: " + opt.inputs);
        if (!plans_file) throw ParseError("failed writing " + plans_out.string());

        const BatchReport report = stats.finalize();
        summary = json{{"plans", plans_out.string()}, {"report", artifacts::to_json(report)}};
        text << report.line << "\n"
             << "plans: " << report.count << "  active rows: min " << report.min_active
             << " p50 " << report.p50_active << " p90 " << report.p90_active << " p99 "
             << report.p99_active << " max " << report.max_active << "\n"
             << "wrote " << plans_out.string() << "\n";

        if (opt.write_union) {
            const SelectionPlan u = union_plans(for_union);
            const fs::path union_out = out_path(opt.output_dir, "", "union_plan.json");
            artifacts::save_json(artifacts::to_json(u), union_out);
            summary["union_plan"] = union_out.string();
            text << "union plan: " << u.active_ids.size() << " rows, wrote "
                 << union_out.string() << "\n";
        }
    }

    const fs::path stats_out = out_path(opt.output_dir, opt.stats_out, "select_stats.json");
    artifacts::save_json(summary["report"], stats_out);
    summary["stats"] = stats_out.string();
    emit(opt.format, summary, text.str());
    return 0;
}

// ---- evaluate -------------------------------------------------------------------

struct EvaluateOpts {
    std::string static_path, corpus, tokenizer, out, output_dir;
    bool profiling = false;
    Format format = Format::Text;
};

int run_evaluate(const EvaluateOpts& opt) {
    const auto tokenizer = maybe_load_tokenizer(opt.tokenizer);
    const Tokenizer* tok = tokenizer ? &*tokenizer : nullptr;
    const StaticTaskVocab v =
        artifacts::static_from_json(artifacts::load_json(opt.static_path), opt.static_path);
    const std::size_t vocab = v.members.universe_size();
    const TokenSet pruned = TokenSet::from_ids(vocab, v.tolerance_pruned);

    std::int64_t documents = 0, impacted = 0, uncovered = 0;
    TokenSet input_scratch(vocab);
    CorpusReader reader(opt.corpus);
    while (auto rec = reader.next()) {
        const Document doc = to_document(*rec, tok);
        for (TokenId id : doc.input_ids)
            if (id >= vocab)
                throw IntegrityError("document " + std::to_string(doc.doc_index) +
                                     ": input id " + std::to_string(id) +
                                     " out of range for vocabulary of size " +
                                     std::to_string(vocab));
        input_scratch = TokenSet::from_ids(vocab, doc.input_ids);

        bool doc_impacted = false, doc_uncovered = false;
        for (TokenId id : doc.output_ids) {
            if (id >= vocab)
                throw IntegrityError("document " + std::to_string(doc.doc_index) +
                                     ": output id " + std::to_string(id) +
                                     " out of range for vocabulary of size " +
                                     std::to_string(vocab));
            if (pruned.contains(id)) doc_impacted = true;
            if (!input_scratch.contains(id) && !v.members.contains(id)) doc_uncovered = true;
        }
        impacted += doc_impacted;
        uncovered += doc_uncovered;
        ++documents;
    }
    if (documents == 0) throw ConfigError("empty corpus: " + opt.corpus);

    const double impacted_fraction =
        static_cast<double>(impacted) / static_cast<double>(documents);
    const double uncovered_fraction =
        static_cast<double>(uncovered) / static_cast<double>(documents);

    json summary{{"documents", documents},
                 {"impacted_documents", impacted},
                 {"impacted_fraction", impacted_fraction},
                 {"uncovered_documents", uncovered},
                 {"uncovered_fraction", uncovered_fraction},
                 {"tau", v.tau},
                 {"profiling_corpus", opt.profiling}};

    const fs::path out = out_path(opt.output_dir, opt.out, "evaluate.json");
    artifacts::save_json(summary, out);

    std::ostringstream text;
    text << "evaluated " << documents << " documents against a static vocabulary of "
         << v.members.size() << " (tau=" << v.tau << ")\n"
         << "  impacted (lost a tolerance-pruned token) : " << impacted << "/" << documents
         << " (" << impacted_fraction << ")\n"
         << "  not covered by I_i union static          : " << uncovered << "/" << documents
         << " (" << uncovered_fraction << ")\n";
    if (opt.profiling)
        text << "  assertion on profiling corpus: " << impacted_fraction << " <= tau " << v.tau
             << "\n";
    text << "wrote " << out.string() << "\n";
    emit(opt.format, summary, text.str());

    // The tolerance guarantee binds only on the corpus the profile came from.
    if (opt.profiling &&
        static_cast<double>(impacted) > v.tau * static_cast<double>(documents))
        throw IntegrityError("tolerance guarantee violated on the profiling corpus: " +
                             std::to_string(impacted) + "/" + std::to_string(documents) +
                             " impacted documents exceeds tau=" + std::to_string(v.tau));
    return 0;
}

// ---- simulate -------------------------------------------------------------------

struct SimulateOpts {
    std::string hardware, plan, out, output_dir;
    std::optional<std::size_t> plan_size;
    std::size_t dim = 0;
    int dtype_bytes = 2;
    std::size_t prompt_len = 0;
    double flops_per_token = 0.0;
    bool breakeven = false;
    Format format = Format::Text;
};

int run_simulate(const SimulateOpts& opt) {
    HardwareModel hw;
    bool illustrative = false;
    if (opt.hardware.empty()) {
        hw = HardwareModel::illustrative_default();
        illustrative = true;
    } else {
        hw = artifacts::hardware_from_json(artifacts::load_json(opt.hardware), opt.hardware);
    }

    std::size_t plan_size = 0;
    if (!opt.plan.empty() && opt.plan_size)
        throw ConfigError("pass one of --plan or --plan-size, not both");
    if (!opt.plan.empty()) {
        const SelectionPlan plan =
            artifacts::plan_from_json(artifacts::load_json(opt.plan), opt.plan);
        plan_size = plan.active_ids.size();
    } else if (opt.plan_size) {
        plan_size = *opt.plan_size;
    } else {
        throw ConfigError("pass --plan or --plan-size");
    }

    const OverlapTimeline t = simulate(hw, plan_size, opt.dim, opt.dtype_bytes,
                                       opt.prompt_len, opt.flops_per_token);
    json summary{{"hardware", artifacts::to_json(hw)},
                 {"illustrative_defaults", illustrative},
                 {"plan_size", plan_size},
                 {"timeline", artifacts::to_json(t)}};

    std::ostringstream text;
    if (illustrative)
        text << "using illustrative hardware defaults (no --hardware file given)\n";
    text << "plan rows " << plan_size << ", transfer " << t.transfer_time << " s, prefill "
         << t.prefill_time << " s, host embedding " << t.embedding_time << " s\n"
         << "exposed latency: " << t.exposed_latency << " s ("
         << (t.hidden ? "transfer fully hidden" : "transfer exposed") << ")\n";

    if (opt.breakeven) {
        const std::size_t rows = breakeven_rows(hw, opt.dim, opt.dtype_bytes, opt.prompt_len,
                                                opt.flops_per_token);
        summary["breakeven_rows"] = rows;
        text << "breakeven rows (largest fully hidden plan): " << rows << "\n";
    }

    const fs::path out = out_path(opt.output_dir, opt.out, "timeline.json");
    artifacts::save_json(summary, out);
    text << "wrote " << out.string() << "\n";
    emit(opt.format, summary, text.str());
    return 0;
}

// ---- report ---------------------------------------------------------------------

struct ReportOpts {
    std::string profile, static_path, stats, plan, out, output_dir;
    std::optional<std::size_t> dim;
    int dtype_bytes = 2;
    Format format = Format::Text;
};

int run_report(const ReportOpts& opt) {
    json summary = json::object();
    std::ostringstream text;

    if (!opt.profile.empty()) {
        const ProfiledCorpus p =
            artifacts::profile_from_json(artifacts::load_json(opt.profile), opt.profile);
        const OverlapStats stats = locality_report(p);
        summary["corpus"] = json{{"M", p.doc_count},
                                 {"vocab_size", p.vocab_size},
                                 {"input_union_size", p.input_union.size()},
                                 {"output_union_size", p.output_union.size()},
                                 {"stats", artifacts::to_json(stats)}};
        text << "[corpus] " << p.doc_count << " documents, input union "
             << p.input_union.size() << ", output union " << p.output_union.size()
             << ", locality ratio " << stats.locality_ratio << "x, overlap "
             << stats.mean_overlap << " (occurrence) / " << stats.mean_overlap_distinct
             << " (distinct)\n";
    }

    std::optional<StaticTaskVocab> static_vocab;
    if (!opt.static_path.empty()) {
        static_vocab = artifacts::static_from_json(artifacts::load_json(opt.static_path),
                                                   opt.static_path);
        summary["static"] = json{{"tau", static_vocab->tau},
                                 {"stage_sizes", static_vocab->stage_sizes},
                                 {"members", static_vocab->members.size()},
                                 {"pruned", static_vocab->tolerance_pruned.size()}};
        text << "[static] tau=" << static_vocab->tau << " stages "
             << static_vocab->stage_sizes[0] << " -> " << static_vocab->stage_sizes[1]
             << " -> " << static_vocab->stage_sizes[2] << " -> "
             << static_vocab->stage_sizes[3] << ", pruned "
             << static_vocab->tolerance_pruned.size() << "\n";
    }

    std::optional<std::size_t> memory_rows;
    std::optional<std::size_t> full_size;
    if (static_vocab) full_size = static_vocab->members.universe_size();

    if (!opt.stats.empty()) {
        const json stats = artifacts::load_json(opt.stats);
        summary["selection"] = stats;
        if (stats.contains("line"))
            text << "[selection] " << stats["line"].get<std::string>() << " over "
                 << stats.value("count", 0) << " plans\n";
        if (stats.contains("mean_active"))
            memory_rows = static_cast<std::size_t>(stats["mean_active"].get<double>() + 0.5);
        if (stats.contains("full_vocab_size"))
            full_size = stats["full_vocab_size"].get<std::size_t>();
    }
    if (!opt.plan.empty()) {
        const SelectionPlan plan =
            artifacts::plan_from_json(artifacts::load_json(opt.plan), opt.plan);
        summary["plan"] = json{{"active", plan.active_ids.size()},
                               {"n_static", plan.n_static},
                               {"n_dynamic", plan.n_dynamic},
                               {"full_vocab_size", plan.full_vocab_size}};
        text << "[plan] " << plan.active_ids.size() << " active rows (" << plan.n_static
             << " static + " << plan.n_dynamic << " dynamic) of " << plan.full_vocab_size
             << "\n";
        memory_rows = plan.active_ids.size();
        full_size = plan.full_vocab_size;
    }

    if (opt.dim && memory_rows && full_size) {
        const MemoryReport mem = memory_report(*full_size, *opt.dim, opt.dtype_bytes,
                                               *memory_rows);
        summary["memory"] = artifacts::to_json(mem);
        text << "[memory] sub-head " << mem.sub_head_bytes << " B vs full head "
             << mem.full_head_bytes << " B; embedding offloaded ("
             << mem.embedding_bytes_host << " B host); saved fraction "
             << mem.saved_fraction << "\n";
    }

    if (summary.empty())
        throw ConfigError("nothing to report: pass --profile, --static, --stats or --plan");

    if (!opt.out.empty() || !opt.output_dir.empty()) {
        const fs::path out = out_path(opt.output_dir, opt.out, "report.json");
        artifacts::save_json(summary, out);
        text << "wrote " << out.string() << "\n";
    }
    emit(opt.format, summary, text.str());
    return 0;
}

// ---- wiring ---------------------------------------------------------------------

template <typename Opt>
void add_format_flag(CLI::App* cmd, Opt& opt, std::string& format_name) {
    cmd->add_option("-f,--format", format_name, "stdout rendering: text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    cmd->parse_complete_callback([&] { opt.format = parse_format(format_name); });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid static-dynamic vocabulary selection toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "pipeline config JSON (default: $" + std::string(kConfigEnvVar) + ")");

    ProfileOpts profile_opt;
    BuildStaticOpts build_opt;
    SelectOpts select_opt;
    EvaluateOpts eval_opt;
    SimulateOpts sim_opt;
    ReportOpts report_opt;
    std::string fmt_prof = "text", fmt_build = "text", fmt_sel = "text", fmt_eval = "text",
                fmt_sim = "text", fmt_rep = "text";

    auto* prof = app.add_subcommand("profile", "profile a JSONL corpus");
    prof->add_option("-c,--corpus", profile_opt.corpus, "JSONL corpus file");
    prof->add_option("-t,--tokenizer", profile_opt.tokenizer, "tokenizer JSON file");
    prof->add_option("--vocab-size", profile_opt.vocab_size,
                     "vocabulary size (required for pre-tokenized corpora)");
    prof->add_option("--threads", profile_opt.threads, "worker threads")->check(CLI::Range(1u, 64u));
    prof->add_option("--out", profile_opt.out, "profile output path");
    prof->add_option("-o,--output-dir", profile_opt.output_dir, "artifact directory");
    add_format_flag(prof, profile_opt, fmt_prof);

    auto* build = app.add_subcommand("build-static", "build the static task vocabulary");
    build->add_option("-p,--profile", build_opt.profile, "profile JSON from `profile`");
    build->add_option("-t,--tokenizer", build_opt.tokenizer, "tokenizer JSON file");
    build->add_option("--tau", build_opt.taus, "tolerance threshold(s) in [0,1]");
    build->add_option("--blocks", build_opt.blocks,
                      "allowed Unicode blocks (comma separated; \"all\" disables)");
    build->add_option("--keep", build_opt.keep,
                      "always-keep tokens (\"id:<n>\" or a token surface)");
    build->add_flag("--no-byte-fragments", build_opt.drop_byte_fragments,
                    "drop tokens whose bytes are not valid UTF-8");
    build->add_option("--compat-per-example-ia", build_opt.compat_per_example,
                      "study mode: subtract only this example's input set in stage 1");
    build->add_option("-c,--corpus", build_opt.corpus,
                      "corpus file (only for --compat-per-example-ia)");
    build->add_option("--out", build_opt.out, "static vocabulary output path");
    build->add_option("-o,--output-dir", build_opt.output_dir, "artifact directory");
    add_format_flag(build, build_opt, fmt_build);

    auto* sel = app.add_subcommand("select", "build selection plans for inference inputs");
    sel->add_option("-s,--static", select_opt.static_path, "static vocabulary JSON");
    sel->add_option("-t,--tokenizer", select_opt.tokenizer, "tokenizer JSON file");
    sel->add_option("--text", select_opt.text, "single input text");
    sel->add_option("--inputs", select_opt.inputs, "JSONL file of inputs");
    sel->add_option("--full-size", select_opt.full_size, "full vocabulary size");
    sel->add_option("--out", select_opt.out, "plan output path (single input)");
    sel->add_option("--plans-out", select_opt.plans_out, "plans JSONL path (batch)");
    sel->add_option("--stats-out", select_opt.stats_out, "batch statistics output path");
    sel->add_flag("--union", select_opt.write_union, "also write the micro-batch union plan");
    sel->add_option("-o,--output-dir", select_opt.output_dir, "artifact directory");
    add_format_flag(sel, select_opt, fmt_sel);

    auto* eval = app.add_subcommand("evaluate", "check output coverage of a corpus");
    eval->add_option("-s,--static", eval_opt.static_path, "static vocabulary JSON")->required();
    eval->add_option("-c,--corpus", eval_opt.corpus, "evaluation corpus JSONL");
    eval->add_option("-t,--tokenizer", eval_opt.tokenizer, "tokenizer JSON file");
    eval->add_flag("--profiling", eval_opt.profiling,
                   "corpus is the profiling corpus: assert impacted fraction <= tau");
    eval->add_option("--out", eval_opt.out, "report output path");
    eval->add_option("-o,--output-dir", eval_opt.output_dir, "artifact directory");
    add_format_flag(eval, eval_opt, fmt_eval);

    auto* sim = app.add_subcommand("simulate", "transfer/compute overlap timeline");
    sim->add_option("--hardware", sim_opt.hardware, "hardware model JSON");
    sim->add_option("--plan", sim_opt.plan, "selection plan JSON");
    sim->add_option("--plan-size", sim_opt.plan_size, "plan size in rows");
    sim->add_option("--dim", sim_opt.dim, "hidden dimension")->required();
    sim->add_option("--dtype-bytes", sim_opt.dtype_bytes, "bytes per weight element (2 or 4)");
    sim->add_option("--prompt-len", sim_opt.prompt_len, "prompt length in tokens")->required();
    sim->add_option("--flops-per-token", sim_opt.flops_per_token,
                    "model forward flops per prompt token")
        ->required();
    sim->add_flag("--breakeven", sim_opt.breakeven, "also report the breakeven plan size");
    sim->add_option("--out", sim_opt.out, "timeline output path");
    sim->add_option("-o,--output-dir", sim_opt.output_dir, "artifact directory");
    add_format_flag(sim, sim_opt, fmt_sim);

    auto* rep = app.add_subcommand("report", "combined summary of pipeline artifacts");
    rep->add_option("-p,--profile", report_opt.profile, "profile JSON");
    rep->add_option("-s,--static", report_opt.static_path, "static vocabulary JSON");
    rep->add_option("--stats", report_opt.stats, "select statistics JSON");
    rep->add_option("--plan", report_opt.plan, "selection plan JSON");
    rep->add_option("--dim", report_opt.dim, "hidden dimension (enables the memory section)");
    rep->add_option("--dtype-bytes", report_opt.dtype_bytes, "bytes per weight element");
    rep->add_option("--out", report_opt.out, "report output path");
    rep->add_option("-o,--output-dir", report_opt.output_dir, "artifact directory");
    add_format_flag(rep, report_opt, fmt_rep);

    try {
        app.parse(argc, argv);

        // Config file defaults fill any flag the user did not pass.
        if (config_path.empty())
            if (const char* env = std::getenv(kConfigEnvVar)) config_path = env;
        if (!config_path.empty()) {
            const PipelineDefaults d = load_defaults(config_path);
            auto fill = [](CLI::App* cmd, const char* flag, auto& field, const auto& value) {
                if (value && cmd->count(flag) == 0) field = *value;
            };
            fill(prof, "--corpus", profile_opt.corpus, d.corpus);
            fill(prof, "--tokenizer", profile_opt.tokenizer, d.tokenizer);
            fill(prof, "--output-dir", profile_opt.output_dir, d.output_dir);
            fill(build, "--tokenizer", build_opt.tokenizer, d.tokenizer);
            fill(build, "--corpus", build_opt.corpus, d.corpus);
            fill(build, "--output-dir", build_opt.output_dir, d.output_dir);
            fill(build, "--blocks", build_opt.blocks, d.blocks);
            fill(build, "--keep", build_opt.keep, d.keep);
            if (d.tau && build->count("--tau") == 0) build_opt.taus = {*d.tau};
            fill(sel, "--tokenizer", select_opt.tokenizer, d.tokenizer);
            fill(sel, "--output-dir", select_opt.output_dir, d.output_dir);
            fill(eval, "--tokenizer", eval_opt.tokenizer, d.tokenizer);
            fill(eval, "--corpus", eval_opt.corpus, d.corpus);
            fill(eval, "--output-dir", eval_opt.output_dir, d.output_dir);
            fill(sim, "--output-dir", sim_opt.output_dir, d.output_dir);
            fill(rep, "--output-dir", report_opt.output_dir, d.output_dir);
            if (d.format) {
                auto fill_format = [&](CLI::App* cmd, auto& opt) {
                    if (cmd->count("--format") == 0) opt.format = parse_format(*d.format);
                };
                fill_format(prof, profile_opt);
                fill_format(build, build_opt);
                fill_format(sel, select_opt);
                fill_format(eval, eval_opt);
                fill_format(sim, sim_opt);
                fill_format(rep, report_opt);
            }
        }

        if (prof->parsed()) {
            if (profile_opt.corpus.empty()) throw ConfigError("profile needs --corpus");
            return run_profile(profile_opt);
        }
        if (build->parsed()) {
            if (build_opt.profile.empty()) throw ConfigError("build-static needs --profile");
            return run_build_static(build_opt);
        }
        if (sel->parsed()) return run_select(select_opt);
        if (eval->parsed()) {
            if (eval_opt.corpus.empty()) throw ConfigError("evaluate needs --corpus");
            return run_evaluate(eval_opt);
        }
        if (sim->parsed()) return run_simulate(sim_opt);
        if (rep->parsed()) return run_report(report_opt);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are config errors
    } catch (const subvocab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
