#include "subvocab/artifacts.hpp"

#include <fstream>

#include "subvocab/error.hpp"
#include "subvocab/unicode.hpp"

namespace subvocab::artifacts {

namespace {

using nlohmann::json;

json ids_to_json(const std::vector<TokenId>& ids) {
    return json(ids);
}

json set_to_json(const TokenSet& s) {
    return json(s.to_ids());
}

TokenSet set_from_json(const json& arr, std::size_t universe, std::string_view origin,
                       const char* field) {
    if (!arr.is_array())
        throw ParseError(std::string(origin) + ": \"" + field + "\" must be an array");
    TokenSet s(universe);
    for (const json& v : arr) s.insert(v.get<TokenId>());
    return s;
}

const json& require(const json& doc, const char* field, std::string_view origin) {
    auto it = doc.find(field);
    if (it == doc.end())
        throw ParseError(std::string(origin) + ": missing field \"" + field + "\"");
    return *it;
}

} // namespace

json to_json(const ProfiledCorpus& p) {
    json df = json::object();
    for (std::size_t v = 0; v < p.df.size(); ++v)
        if (p.df[v] > 0) df[std::to_string(v)] = p.df[v];

    json stats;
    stats["vocab_size"] = p.vocab_size;
    json indices = json::array(), sizes = json::array();
    json occ = json::array(), dis = json::array();
    for (const auto& d : p.per_doc) {
        indices.push_back(d.doc_index);
        sizes.push_back(d.distinct_input);
        occ.push_back(d.overlap_occurrence);
        dis.push_back(d.overlap_distinct);
    }
    stats["doc_indices"] = std::move(indices);
    stats["per_doc_input_sizes"] = std::move(sizes);
    stats["per_doc_overlap"] = std::move(occ);
    stats["per_doc_overlap_distinct"] = std::move(dis);
    if (p.doc_count > 0) {
        const OverlapStats agg = locality_report(p);
        stats["mean_overlap"] = agg.mean_overlap;
        stats["mean_overlap_distinct"] = agg.mean_overlap_distinct;
        stats["mean_input_size"] = agg.mean_input_size;
        stats["union_input_size"] = agg.union_input_size;
        stats["locality_ratio"] = agg.locality_ratio;
    }

    return json{{"M", p.doc_count},
                {"df", std::move(df)},
                {"input_union", set_to_json(p.input_union)},
                {"output_union", set_to_json(p.output_union)},
                {"stats", std::move(stats)}};
}

ProfiledCorpus profile_from_json(const json& doc, std::string_view origin) {
    ProfiledCorpus p;
    const json& stats = require(doc, "stats", origin);
    p.vocab_size = require(stats, "vocab_size", origin).get<std::size_t>();
    p.doc_count = require(doc, "M", origin).get<std::int64_t>();
    p.df.assign(p.vocab_size, 0);
    for (const auto& [key, value] : require(doc, "df", origin).items()) {
        const std::uint64_t id = std::stoull(key);
        if (id >= p.vocab_size)
            throw IntegrityError(std::string(origin) + ": df key " + key +
                                 " out of range for vocabulary of size " +
                                 std::to_string(p.vocab_size));
        p.df[id] = value.get<std::uint32_t>();
    }
    p.input_union = set_from_json(require(doc, "input_union", origin), p.vocab_size, origin,
                                  "input_union");
    p.output_union = set_from_json(require(doc, "output_union", origin), p.vocab_size, origin,
                                   "output_union");

    const json& indices = require(stats, "doc_indices", origin);
    const json& sizes = require(stats, "per_doc_input_sizes", origin);
    const json& occ = require(stats, "per_doc_overlap", origin);
    const json& dis = require(stats, "per_doc_overlap_distinct", origin);
    if (indices.size() != sizes.size() || sizes.size() != occ.size() ||
        occ.size() != dis.size() ||
        static_cast<std::int64_t>(indices.size()) != p.doc_count)
        throw IntegrityError(std::string(origin) + ": per-document arrays disagree with M");
    p.per_doc.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        p.per_doc[i].doc_index = indices[i].get<std::int64_t>();
        p.per_doc[i].distinct_input = sizes[i].get<std::uint32_t>();
        p.per_doc[i].overlap_occurrence = occ[i].get<double>();
        p.per_doc[i].overlap_distinct = dis[i].get<double>();
    }
    return p;
}

json to_json(const StaticTaskVocab& v) {
    json blocks;
    if (v.allowed_blocks) {
        blocks = json::array();
        for (int b : *v.allowed_blocks) blocks.push_back(unicode::block_name(b));
    } else {
        blocks = "all";
    }
    json provenance = json::object();
    for (const auto& [id, prov] : v.provenance)
        provenance[std::to_string(id)] = provenance_name(prov);

    return json{{"tau", v.tau},
                {"allowed_blocks", std::move(blocks)},
                {"members", set_to_json(v.members)},
                {"stage_sizes", v.stage_sizes},
                {"pruned_df_sum", v.pruned_df_sum},
                {"pruned", ids_to_json(v.tolerance_pruned)},
                {"provenance", std::move(provenance)},
                {"vocab_size", v.members.universe_size()}};
}

std::size_t static_vocab_size(const json& doc, std::string_view origin) {
    return require(doc, "vocab_size", origin).get<std::size_t>();
}

StaticTaskVocab static_from_json(const json& doc, std::string_view origin) {
    StaticTaskVocab v;
    const std::size_t vocab = static_vocab_size(doc, origin);
    v.tau = require(doc, "tau", origin).get<double>();
    const json& blocks = require(doc, "allowed_blocks", origin);
    if (blocks.is_string() && blocks.get<std::string>() == "all") {
        v.allowed_blocks = std::nullopt;
    } else {
        std::vector<std::string> names = blocks.get<std::vector<std::string>>();
        v.allowed_blocks = FilterConfig::resolve_blocks(names);
    }
    v.members = set_from_json(require(doc, "members", origin), vocab, origin, "members");
    const auto sizes = require(doc, "stage_sizes", origin).get<std::vector<std::size_t>>();
    if (sizes.size() != 4)
        throw ParseError(std::string(origin) + ": stage_sizes must hold 4 entries");
    std::copy(sizes.begin(), sizes.end(), v.stage_sizes.begin());
    v.pruned_df_sum = require(doc, "pruned_df_sum", origin).get<std::uint64_t>();
    v.tolerance_pruned = require(doc, "pruned", origin).get<std::vector<TokenId>>();
    for (const auto& [key, value] : require(doc, "provenance", origin).items()) {
        const TokenId id = static_cast<TokenId>(std::stoull(key));
        const std::string name = value.get<std::string>();
        if (name == provenance_name(Provenance::Filtered))
            v.provenance.emplace(id, Provenance::Filtered);
        else if (name == provenance_name(Provenance::AlwaysKeep))
            v.provenance.emplace(id, Provenance::AlwaysKeep);
        else
            throw ParseError(std::string(origin) + ": unknown provenance \"" + name + "\"");
    }
    return v;
}

json to_json(const SelectionPlan& plan) {
    return json{{"active_ids", ids_to_json(plan.active_ids)},
                {"n_static", plan.n_static},
                {"n_dynamic", plan.n_dynamic},
                {"full_vocab_size", plan.full_vocab_size}};
}

SelectionPlan plan_from_json(const json& doc, std::string_view origin) {
    SelectionPlan plan;
    plan.active_ids = require(doc, "active_ids", origin).get<std::vector<TokenId>>();
    plan.n_static = require(doc, "n_static", origin).get<std::size_t>();
    plan.n_dynamic = require(doc, "n_dynamic", origin).get<std::size_t>();
    plan.full_vocab_size = require(doc, "full_vocab_size", origin).get<std::size_t>();
    for (std::size_t i = 1; i < plan.active_ids.size(); ++i)
        if (plan.active_ids[i] <= plan.active_ids[i - 1])
            throw IntegrityError(std::string(origin) +
                                 ": active_ids must be strictly increasing");
    if (!plan.active_ids.empty() && plan.active_ids.back() >= plan.full_vocab_size)
        throw IntegrityError(std::string(origin) + ": active id " +
                             std::to_string(plan.active_ids.back()) +
                             " out of range for full_vocab_size " +
                             std::to_string(plan.full_vocab_size));
    return plan;
}

json to_json(const HardwareModel& hw) {
    return json{{"link_bandwidth", hw.link_bandwidth},
                {"device_flops", hw.device_flops},
                {"host_lookup_latency", hw.host_lookup_latency}};
}

HardwareModel hardware_from_json(const json& doc, std::string_view origin) {
    HardwareModel hw;
    hw.link_bandwidth = require(doc, "link_bandwidth", origin).get<double>();
    hw.device_flops = require(doc, "device_flops", origin).get<double>();
    hw.host_lookup_latency = require(doc, "host_lookup_latency", origin).get<double>();
    hw.validate();
    return hw;
}

json to_json(const OverlapTimeline& t) {
    return json{{"transfer_time", t.transfer_time},
                {"prefill_time", t.prefill_time},
                {"embedding_time", t.embedding_time},
                {"exposed_latency", t.exposed_latency},
                {"hidden", t.hidden}};
}

json to_json(const MemoryReport& r) {
    return json{{"full_head_bytes", r.full_head_bytes},
                {"sub_head_bytes", r.sub_head_bytes},
                {"embedding_bytes_gpu", r.embedding_bytes_gpu},
                {"embedding_bytes_host", r.embedding_bytes_host},
                {"saved_fraction", r.saved_fraction}};
}

json to_json(const BatchReport& r) {
    return json{{"count", r.count},
                {"n_static", r.n_static},
                {"mean_dynamic", r.mean_dynamic},
                {"mean_active", r.mean_active},
                {"full_vocab_size", r.full_vocab_size},
                {"percent_of_full", r.percent_of_full},
                {"min_active", r.min_active},
                {"p50_active", r.p50_active},
                {"p90_active", r.p90_active},
                {"p99_active", r.p99_active},
                {"max_active", r.max_active},
                {"line", r.line}};
}

json to_json(const OverlapStats& s) {
    return json{{"documents", s.doc_count},
                {"mean_overlap", s.mean_overlap},
                {"mean_overlap_distinct", s.mean_overlap_distinct},
                {"mean_input_size", s.mean_input_size},
                {"union_input_size", s.union_input_size},
                {"locality_ratio", s.locality_ratio}};
}

void save_json(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw ParseError("failed writing " + path.string());
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace subvocab::artifacts
