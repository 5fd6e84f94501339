#pragma once

#include <cstddef>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dar/eval.hpp"
#include "dar/policy.hpp"
#include "dar/rewards.hpp"
#include "dar/synthetic.hpp"
#include "dar/trainer.hpp"

namespace dar::io {

using nlohmann::json;

// Files. All failures throw DataError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

// Dataset JSONL: {"x": real, "y": real, "region": "interp"|"extrap_left"|"extrap_right"}
std::string dataset_to_jsonl(const Dataset& data);
Dataset dataset_from_jsonl(const std::string& text, const std::string& source = "<memory>");
Dataset read_dataset(const std::filesystem::path& path);

/// One row of a rollout file: exactly one of samples / texts is present.
struct RolloutRecord {
    std::string id;
    double target = 0.0;
    std::optional<std::vector<double>> samples;
    std::optional<std::vector<std::string>> texts;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct RolloutFile {
    std::vector<std::pair<std::size_t, RolloutRecord>> records;  // (line number, record)
    std::vector<RowError> errors;
};

/// Throws DataError with a precise message for a malformed row.
RolloutRecord rollout_record_from_json(const json& row);
/// Parses every line; malformed rows are collected in `errors`, not thrown.
RolloutFile rollouts_from_jsonl(const std::string& text);
RolloutFile read_rollouts(const std::filesystem::path& path);

/// Texts go through parse_prediction; unparseable entries become invalid
/// rollouts with a 0.0 placeholder.
RolloutSet to_rollout_set(const RolloutRecord& record);

// Checkpoints.
json policy_to_json(const GridPolicy& policy);
GridPolicy policy_from_json(const json& j);

struct Checkpoint {
    GridPolicy policy;
    std::uint64_t seed = 0;
    std::optional<TrainState> state;
};

json checkpoint_to_json(const GridPolicy& policy, std::uint64_t seed, const TrainState* state);
Checkpoint checkpoint_from_json(const json& j);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// CSV. Fixed column order, locale-independent shortest round-trip numbers,
// empty field for undefined values.
std::string csv_number(double value);
std::string csv_optional(const std::optional<double>& value);
std::string train_log_csv(const TrainLog& log);

json metrics_to_json(const MetricsReport& report);
std::string metrics_csv(const MetricsReport& report);
json calibration_to_json(const CalibrationReport& report);
std::string calibration_points_csv(const CalibrationReport& report);

/// Serializes with two-space indent and a trailing newline.
std::string dump(const json& j);

} // namespace dar::io
