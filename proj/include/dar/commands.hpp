#pragma once

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "dar/eval.hpp"
#include "dar/synthetic.hpp"
#include "dar/trainer.hpp"

namespace dar::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Every recognized key with its default value. The resolved config of a
/// run is always a complete copy of this object.
json default_config();

/// defaults <- config file <- overrides. Unknown keys and type mismatches
/// throw ConfigError.
json resolve_config(const std::optional<std::filesystem::path>& config_file, const json& overrides);

MixtureTaskSpec task_spec_from(const json& cfg);
TrainConfig train_config_from(const json& cfg);
EvalConfig eval_config_from(const json& cfg);

/// The commands below write into cfg["out_dir"], starting with config.json,
/// and throw on failure. Progress goes to `log`.
void cmd_gen_data(const json& cfg, std::ostream& log);
void cmd_train(const json& cfg, std::ostream& log);
void cmd_eval(const json& cfg, std::ostream& log);
/// Returns false when no row could be scored.
bool cmd_score(const json& cfg, std::ostream& log);
void cmd_calib(const json& cfg, std::ostream& log);

/// Dispatches by name and maps exceptions to exit codes, reporting to `err`.
int run(const std::string& command, const json& cfg, std::ostream& log, std::ostream& err);

} // namespace dar::cli
