#pragma once

#include <filesystem>
#include <string_view>

#include "json.hpp"

#include "subvocab/head.hpp"
#include "subvocab/offload_sim.hpp"
#include "subvocab/profiler.hpp"
#include "subvocab/selector.hpp"
#include "subvocab/static_builder.hpp"

// JSON artifact formats. All artifacts are timestamp-free and serialized
// with sorted keys, so re-running a command rewrites byte-identical files.
namespace subvocab::artifacts {

nlohmann::json to_json(const ProfiledCorpus& p);
ProfiledCorpus profile_from_json(const nlohmann::json& doc, std::string_view origin);

nlohmann::json to_json(const StaticTaskVocab& v);
StaticTaskVocab static_from_json(const nlohmann::json& doc, std::string_view origin);

nlohmann::json to_json(const SelectionPlan& plan);
SelectionPlan plan_from_json(const nlohmann::json& doc, std::string_view origin);

nlohmann::json to_json(const HardwareModel& hw);
HardwareModel hardware_from_json(const nlohmann::json& doc, std::string_view origin);

nlohmann::json to_json(const OverlapTimeline& t);
nlohmann::json to_json(const MemoryReport& r);
nlohmann::json to_json(const BatchReport& r);
nlohmann::json to_json(const OverlapStats& s);

// vocab_size recorded inside the static artifact (the member/pruned sets
// need their universe to round-trip).
std::size_t static_vocab_size(const nlohmann::json& doc, std::string_view origin);

void save_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

} // namespace subvocab::artifacts
