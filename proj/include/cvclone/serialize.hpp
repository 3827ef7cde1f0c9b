#pragma once

#include <string>

#include "json.hpp"

#include "cvclone/gaussian.hpp"
#include "cvclone/optimizer.hpp"
#include "cvclone/protocol.hpp"

namespace cvclone {

// State layout: {"modes": N, "mean": [...], "cov": [[...]]}, row-major full matrix.
nlohmann::json state_to_json(const GaussianState& state);
GaussianState state_from_json(const nlohmann::json& j);

nlohmann::json channel_to_json(const GaussianChannel& channel);
nlohmann::json input_to_json(const InputSpec& input);
nlohmann::json report_to_json(const TelecloneReport& report);

nlohmann::json genome_to_json(const CircuitGenome& genome);
CircuitGenome genome_from_json(const nlohmann::json& j);
nlohmann::json search_result_to_json(const SearchResult& result, const SolutionAnalysis& analysis);

// One row of comma-joined values; doubles at full precision (%.17g).
std::string csv_row(const std::vector<std::string>& cells);
std::string format_full(double value);

std::string iso8601_utc_now();

// {"command", "parameters", "seed", "artifact_version", "timestamp"}.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& parameters,
                             std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Writes `content` to `path` and the manifest beside it at <path>.manifest.json,
// keeping the data file itself byte-stable across re-runs.
void write_with_manifest(const std::string& path, const std::string& content,
                         const nlohmann::json& manifest);

}  // namespace cvclone
