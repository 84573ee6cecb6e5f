#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "noisy_search/harness.hpp"

namespace noisy_search {

inline constexpr int kSpecVersion = 1;

// Experiment spec documents ("spec_version": 1). Missing fields fall back to
// ExperimentSpec defaults; unknown names are rejected.
ExperimentSpec parse_experiment_spec(std::string_view text);
nlohmann::json experiment_spec_to_json(const ExperimentSpec& spec);

nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

std::string result_to_json_text(const ExperimentResult& result);
std::string result_to_csv(const ExperimentResult& result);

// JSON unless the path ends in ".csv". Refuses to overwrite unless `force`.
void persist(const ExperimentResult& result, const std::filesystem::path& path,
             bool force = false);
// Loads a JSON result; errors carry the parse location.
ExperimentResult load(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text, bool force);

}  // namespace noisy_search
