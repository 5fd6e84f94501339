// dar: data generation, training, evaluation and scoring for distribution-aware
// rollout rewards.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dar/commands.hpp"
#include "dar/errors.hpp"

namespace {

using nlohmann::json;

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::string> out_dir, data_dir, checkpoint, rollouts, resume, reward_mode, method, split;
    std::optional<std::uint64_t> seed, max_steps;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("-c,--config", f.config, "flat JSON configuration file");
    sub->add_option("--set", f.sets, "override a key: key=value (value parsed as JSON when possible)");
    sub->add_option("-o,--out", f.out_dir, "output directory");
    sub->add_option("--seed", f.seed, "master seed");
}

json overrides_from(const Flags& f) {
    json o = json::object();
    for (const std::string& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw dar::ConfigError("--set expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        json parsed = json::parse(value, nullptr, false);
        o[key] = parsed.is_discarded() ? json(value) : parsed;
    }
    auto put = [&](const char* key, const auto& v) {
        if (v) o[key] = *v;
    };
    put("out_dir", f.out_dir);
    put("data_dir", f.data_dir);
    put("checkpoint", f.checkpoint);
    put("rollouts", f.rollouts);
    put("resume", f.resume);
    put("reward_mode", f.reward_mode);
    put("method", f.method);
    put("split", f.split);
    put("seed", f.seed);
    put("max_steps", f.max_steps);
    return o;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distribution-aware rewards: CRPS scoring, leave-one-out credit, toy policy training"};
    app.require_subcommand(1);

    Flags flags;
    auto* gen = app.add_subcommand("gen-data", "generate train/val/test JSONL for the mixture task");
    auto* train = app.add_subcommand("train", "train a grid policy (rl with dar/mse rewards, or sft)");
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a data split");
    auto* score = app.add_subcommand("score", "score a rollout JSONL file (CRPS, WIS, bracketing, rewards)");
    auto* calib = app.add_subcommand("calib", "std-vs-error calibration from rollouts or a checkpoint");

    for (auto* sub : {gen, train, eval, score, calib}) add_common(sub, flags);
    for (auto* sub : {train, eval, calib}) sub->add_option("-d,--data-dir", flags.data_dir, "dataset directory");
    train->add_option("--reward-mode", flags.reward_mode, "dar or mse");
    train->add_option("--method", flags.method, "rl or sft");
    train->add_option("--max-steps", flags.max_steps, "number of training steps");
    train->add_option("--resume", flags.resume, "checkpoint with training state to continue from");
    for (auto* sub : {eval, calib}) {
        sub->add_option("--checkpoint", flags.checkpoint, "policy checkpoint JSON");
        sub->add_option("--split", flags.split, "train, val or test");
    }
    for (auto* sub : {score, calib}) sub->add_option("-r,--rollouts", flags.rollouts, "rollout JSONL file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? dar::cli::kOk : dar::cli::kUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    json cfg;
    try {
        std::optional<std::filesystem::path> file;
        if (!flags.config.empty()) file = flags.config;
        cfg = dar::cli::resolve_config(file, overrides_from(flags));
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return dar::cli::kUsage;
    }
    return dar::cli::run(command, cfg, std::cerr, std::cerr);
}
