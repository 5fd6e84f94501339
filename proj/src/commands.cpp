#include "dar/commands.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

#include "dar/errors.hpp"
#include "dar/io.hpp"

namespace dar::cli {

namespace fs = std::filesystem;

json default_config() {
    return json{
        {"seed", 7},
        {"out_dir", "out"},
        {"data_dir", "data"},
        // task
        {"n_train", 1200},
        {"n_test", 600},
        {"val_fraction", 0.1},
        {"logistic_slope", 1.2},
        {"mean_slope", 1.0 / 3.0},
        {"wave_amp", 1.2},
        {"wave_freq", 0.8},
        {"noise_base", 0.12},
        {"noise_amp", 0.28},
        {"noise_freq", 0.7},
        {"train_lo", -6.0},
        {"train_hi", 6.0},
        {"extrap_lo", -10.0},
        {"extrap_hi", 10.0},
        // policy
        {"n_bins", 81},
        {"bin_lo", -6.0},
        {"bin_hi", 6.0},
        {"n_basis", 32},
        {"basis_lo", -12.0},
        {"basis_hi", 12.0},
        {"bandwidth", 0.75},
        // training
        {"method", "rl"},
        {"reward_mode", "dar"},
        {"K", 12},
        {"batch_size", 256},
        {"learning_rate", TrainConfig{}.learning_rate},
        {"sft_learning_rate", TrainConfig{}.sft_learning_rate},
        {"kl_coef", 0.001},
        {"max_steps", 300},
        {"temperature", 1.0},
        {"advantage_epsilon", 1e-8},
        {"eval_every", 10},
        {"val_samples", 32},
        {"invalid_mode", "min_batch"},
        {"invalid_penalty", -1.0},
        {"resume", ""},
        // evaluation and scoring
        {"checkpoint", ""},
        {"split", "test"},
        {"n_samples", 32},
        {"eval_repeats", 5},
        {"alpha_levels", kDefaultWisAlphas},
        {"rollouts", ""},
    };
}

namespace {

bool same_kind(const json& def, const json& v) {
    if (def.is_number_integer()) return v.is_number_integer() && v.get<std::int64_t>() >= 0;
    if (def.is_number()) return v.is_number();
    if (def.is_string()) return v.is_string();
    if (def.is_array()) {
        if (!v.is_array()) return false;
        for (const json& e : v)
            if (!e.is_number()) return false;
        return true;
    }
    return def.type() == v.type();
}

void merge_into(json& cfg, const json& layer, const std::string& origin) {
    if (!layer.is_object()) throw ConfigError(origin + ": configuration must be a flat JSON object");
    for (const auto& [key, value] : layer.items()) {
        if (!cfg.contains(key)) throw ConfigError(origin + ": unknown configuration key '" + key + "'");
        if (!same_kind(cfg[key], value))
            throw ConfigError(origin + ": key '" + key + "' expects a value like " + cfg[key].dump() + ", got " +
                              value.dump());
        // Integer values given for float keys are stored as floats.
        if (cfg[key].is_number_float() && value.is_number_integer())
            cfg[key] = value.get<double>();
        else
            cfg[key] = value;
    }
}

fs::path out_dir(const json& cfg) { return fs::path(cfg.at("out_dir").get<std::string>()); }
fs::path data_dir(const json& cfg) { return fs::path(cfg.at("data_dir").get<std::string>()); }

void echo_config(const json& cfg) {
    io::write_text_file(out_dir(cfg) / "config.json", io::dump(cfg));
}

InvalidPolicy invalid_policy_from(const json& cfg) {
    InvalidPolicy p;
    const std::string mode = cfg.at("invalid_mode").get<std::string>();
    if (mode == "min_batch") p.mode = InvalidMode::min_batch;
    else if (mode == "fixed") p.mode = InvalidMode::fixed;
    else throw ConfigError("invalid_mode must be 'min_batch' or 'fixed', got '" + mode + "'");
    p.penalty = cfg.at("invalid_penalty").get<double>();
    return p;
}

std::vector<double> alpha_levels_from(const json& cfg) {
    auto alphas = cfg.at("alpha_levels").get<std::vector<double>>();
    try {
        (void)wis(EmpiricalDistribution({0.0}), 0.0, alphas);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("alpha_levels: ") + e.what());
    }
    return alphas;
}

} // namespace

json resolve_config(const std::optional<fs::path>& config_file, const json& overrides) {
    json cfg = default_config();
    if (config_file) {
        json file;
        try {
            file = json::parse(io::read_text_file(*config_file));
        } catch (const json::parse_error& e) {
            throw ConfigError("'" + config_file->string() + "': invalid JSON (" + e.what() + ")");
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
        merge_into(cfg, file, config_file->string());
    }
    merge_into(cfg, overrides, "command line");
    return cfg;
}

MixtureTaskSpec task_spec_from(const json& cfg) {
    MixtureTaskSpec s;
    s.logistic_slope = cfg.at("logistic_slope").get<double>();
    s.mean_slope = cfg.at("mean_slope").get<double>();
    s.wave_amp = cfg.at("wave_amp").get<double>();
    s.wave_freq = cfg.at("wave_freq").get<double>();
    s.noise_base = cfg.at("noise_base").get<double>();
    s.noise_amp = cfg.at("noise_amp").get<double>();
    s.noise_freq = cfg.at("noise_freq").get<double>();
    s.train_range = {cfg.at("train_lo").get<double>(), cfg.at("train_hi").get<double>()};
    s.extrap_left = {cfg.at("extrap_lo").get<double>(), s.train_range.lo};
    s.extrap_right = {s.train_range.hi, cfg.at("extrap_hi").get<double>()};
    s.validate();
    return s;
}

TrainConfig train_config_from(const json& cfg) {
    TrainConfig c;
    c.reward_mode = reward_source_from_string(cfg.at("reward_mode").get<std::string>());
    c.K = cfg.at("K").get<std::size_t>();
    c.batch_size = cfg.at("batch_size").get<std::size_t>();
    c.learning_rate = cfg.at("learning_rate").get<double>();
    c.sft_learning_rate = cfg.at("sft_learning_rate").get<double>();
    c.kl_coef = cfg.at("kl_coef").get<double>();
    c.max_steps = cfg.at("max_steps").get<std::size_t>();
    c.temperature = cfg.at("temperature").get<double>();
    c.advantage_epsilon = cfg.at("advantage_epsilon").get<double>();
    c.seed = cfg.at("seed").get<std::uint64_t>();
    c.eval_every = cfg.at("eval_every").get<std::size_t>();
    c.val_samples = cfg.at("val_samples").get<std::size_t>();
    c.invalid = invalid_policy_from(cfg);
    c.grid = {cfg.at("bin_lo").get<double>(), cfg.at("bin_hi").get<double>(), cfg.at("n_bins").get<std::size_t>()};
    c.basis = {cfg.at("basis_lo").get<double>(), cfg.at("basis_hi").get<double>(),
               cfg.at("n_basis").get<std::size_t>(), cfg.at("bandwidth").get<double>()};
    c.validate();
    return c;
}

EvalConfig eval_config_from(const json& cfg) {
    EvalConfig e;
    e.n_samples = cfg.at("n_samples").get<std::size_t>();
    e.repeats = cfg.at("eval_repeats").get<std::size_t>();
    e.seed = derive_seed(cfg.at("seed").get<std::uint64_t>(), static_cast<std::uint64_t>(Stream::evaluation));
    e.alpha_levels = alpha_levels_from(cfg);
    if (e.n_samples < 1 || e.repeats < 1) throw ConfigError("n_samples and eval_repeats must be >= 1");
    return e;
}

void cmd_gen_data(const json& cfg, std::ostream& log) {
    const MixtureTaskSpec spec = task_spec_from(cfg);
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const auto n_train = cfg.at("n_train").get<std::size_t>();
    const auto n_test = cfg.at("n_test").get<std::size_t>();
    if (n_train < 1 || n_test < 1) throw ConfigError("n_train and n_test must be >= 1");
    const double val_fraction = cfg.at("val_fraction").get<double>();

    echo_config(cfg);
    const DatasetPair data = make_dataset(spec, n_train, n_test, seed);
    const ValidationSplit split = split_validation(data.train, val_fraction, seed);

    const fs::path dir = out_dir(cfg);
    io::write_text_file(dir / "train.jsonl", io::dataset_to_jsonl(split.train));
    io::write_text_file(dir / "val.jsonl", io::dataset_to_jsonl(split.val));
    io::write_text_file(dir / "test.jsonl", io::dataset_to_jsonl(data.test));

    json regions = json::object();
    for (const Record& r : data.test.records) regions[to_string(r.region)] = regions.value(to_string(r.region), 0) + 1;
    json manifest = {
        {"seed", seed},
        {"counts", {{"train", split.train.size()}, {"val", split.val.size()}, {"test", data.test.size()}}},
        {"test_regions", regions},
        {"files", {"train.jsonl", "val.jsonl", "test.jsonl"}},
        {"task",
         {{"logistic_slope", spec.logistic_slope},
          {"mean_slope", spec.mean_slope},
          {"wave_amp", spec.wave_amp},
          {"wave_freq", spec.wave_freq},
          {"noise_base", spec.noise_base},
          {"noise_amp", spec.noise_amp},
          {"noise_freq", spec.noise_freq},
          {"train_range", {spec.train_range.lo, spec.train_range.hi}},
          {"extrap_left", {spec.extrap_left.lo, spec.extrap_left.hi}},
          {"extrap_right", {spec.extrap_right.lo, spec.extrap_right.hi}}}},
    };
    io::write_text_file(dir / "manifest.json", io::dump(manifest));
    log << "wrote " << split.train.size() << "/" << split.val.size() << "/" << data.test.size()
        << " train/val/test records to " << dir.string() << "\n";
}

void cmd_train(const json& cfg, std::ostream& log) {
    const TrainConfig config = train_config_from(cfg);
    const std::string method = cfg.at("method").get<std::string>();
    if (method != "rl" && method != "sft") throw ConfigError("method must be 'rl' or 'sft', got '" + method + "'");

    const Dataset train_set = io::read_dataset(data_dir(cfg) / "train.jsonl");
    if (train_set.empty()) throw DataError("training set is empty");
    const fs::path dir = out_dir(cfg);
    echo_config(cfg);

    if (method == "sft") {
        std::vector<double> losses;
        const GridPolicy policy = sft_fit(train_set, config, &losses);
        std::string csv = "step,loss\n";
        for (std::size_t i = 0; i < losses.size(); ++i) csv += std::to_string(i + 1) + "," + io::csv_number(losses[i]) + "\n";
        io::write_text_file(dir / "sft_log.csv", csv);
        const std::string ck = io::dump(io::checkpoint_to_json(policy, config.seed, nullptr));
        io::write_text_file(dir / "best_checkpoint.json", ck);
        io::write_text_file(dir / "final_checkpoint.json", ck);
        log << "sft: " << losses.size() << " steps\n";
        return;
    }

    const Dataset val_set = io::read_dataset(data_dir(cfg) / "val.jsonl");
    if (val_set.empty()) throw DataError("validation set is empty");

    std::optional<TrainState> resume;
    const std::string resume_path = cfg.at("resume").get<std::string>();
    if (!resume_path.empty()) {
        io::Checkpoint ck = io::read_checkpoint(resume_path);
        if (!ck.state) throw DataError("'" + resume_path + "' carries no training state to resume from");
        if (!(ck.policy.grid() == config.grid) || !(ck.policy.basis() == config.basis))
            throw ConfigError("resume checkpoint geometry does not match the configuration");
        resume = std::move(ck.state);
        log << "resuming after step " << resume->completed_steps << "\n";
    }

    const TrainResult result = train(config, train_set, val_set, std::move(resume));

    io::write_text_file(dir / "train_log.csv", io::train_log_csv(result.log));
    io::write_text_file(dir / "final_checkpoint.json",
                        io::dump(io::checkpoint_to_json(result.final, config.seed, &result.state)));
    io::write_text_file(dir / "best_checkpoint.json",
                        io::dump(io::checkpoint_to_json(result.best, config.seed, nullptr)));

    json summary = {
        {"completed_steps", result.state.completed_steps},
        {"best_step", result.state.has_best ? json(result.state.best_step) : json(nullptr)},
        {"best_val_spearman", result.state.best_spearman ? json(*result.state.best_spearman) : json(nullptr)},
        {"best_val_rmse", result.state.has_best ? json(result.state.best_rmse) : json(nullptr)},
        {"reward_mode", to_string(config.reward_mode)},
    };
    io::write_text_file(dir / "train_summary.json", io::dump(summary));
    log << "trained " << result.log.steps.size() << " steps (" << to_string(config.reward_mode) << ")\n";
}

namespace {

Dataset read_split(const json& cfg) {
    const std::string split = cfg.at("split").get<std::string>();
    if (split != "train" && split != "val" && split != "test")
        throw ConfigError("split must be train, val or test, got '" + split + "'");
    const Dataset d = io::read_dataset(data_dir(cfg) / (split + ".jsonl"));
    if (d.empty()) throw DataError("split '" + split + "' is empty");
    return d;
}

GridPolicy read_policy(const json& cfg) {
    const std::string path = cfg.at("checkpoint").get<std::string>();
    if (path.empty()) throw ConfigError("'checkpoint' must name a checkpoint file");
    return io::read_checkpoint(path).policy;
}

} // namespace

void cmd_eval(const json& cfg, std::ostream& log) {
    const EvalConfig ec = eval_config_from(cfg);
    const GridPolicy policy = read_policy(cfg);
    const Dataset data = read_split(cfg);
    echo_config(cfg);

    const MetricsReport report = evaluate_policy(policy, data, ec);
    const CalibrationReport cal = evaluate_calibration(policy, data, ec.n_samples, ec.seed);

    const fs::path dir = out_dir(cfg);
    io::write_text_file(dir / "metrics.json", io::dump(io::metrics_to_json(report)));
    io::write_text_file(dir / "metrics.csv", io::metrics_csv(report));
    io::write_text_file(dir / "calibration.json", io::dump(io::calibration_to_json(cal)));
    io::write_text_file(dir / "calibration_points.csv", io::calibration_points_csv(cal));
    log << "evaluated " << data.size() << " examples: rmse " << report.overall.rmse << "\n";
}

bool cmd_score(const json& cfg, std::ostream& log) {
    const std::string path = cfg.at("rollouts").get<std::string>();
    if (path.empty()) throw ConfigError("'rollouts' must name a rollout JSONL file");
    const std::vector<double> alphas = alpha_levels_from(cfg);
    const InvalidPolicy invalid = invalid_policy_from(cfg);

    const io::RolloutFile file = io::read_rollouts(path);
    echo_config(cfg);

    std::string scores = "line,id,target,n_rollouts,n_valid,n_invalid,crps,wis,bracketed\n";
    std::string rewards = "line,id,rollout,prediction,valid,mse_reward,dar_reward\n";
    std::vector<RolloutSet> sets;
    std::vector<ScoredSamples> scored;
    std::size_t total_invalid = 0, total_rollouts = 0, unusable = 0;

    for (const auto& [line, record] : file.records) {
        const RolloutSet set = io::to_rollout_set(record);
        const std::size_t n_valid = set.valid_count();
        total_rollouts += set.size();
        total_invalid += set.size() - n_valid;
        sets.push_back(set);

        std::string crps_field, wis_field;
        if (n_valid > 0) {
            const EmpiricalDistribution dist(set.valid_predictions());
            const double c = crps_empirical(dist, set.target);
            const double w = wis(dist, set.target, alphas);
            crps_field = io::csv_number(c);
            wis_field = io::csv_number(w);
            scored.push_back({set.valid_predictions(), set.target});
        } else {
            ++unusable;
        }
        scores += std::to_string(line) + "," + set.example_id + "," + io::csv_number(set.target) + "," +
                  std::to_string(set.size()) + "," + std::to_string(n_valid) + "," +
                  std::to_string(set.size() - n_valid) + "," + crps_field + "," + wis_field + "," +
                  (brackets(set) ? "1" : "0") + "\n";

        const RewardVector mse = mse_rewards(set, invalid);
        std::optional<RewardVector> dar;
        if (n_valid >= 2) dar = dar_rewards(set, invalid);
        for (std::size_t k = 0; k < set.size(); ++k) {
            rewards += std::to_string(line) + "," + set.example_id + "," + std::to_string(k) + "," +
                       (set.valid[k] ? io::csv_number(set.predictions[k]) : std::string()) + "," +
                       (set.valid[k] ? "1" : "0") + "," + io::csv_number(mse.rewards[k]) + "," +
                       (dar ? io::csv_number(dar->rewards[k]) : std::string()) + "\n";
        }
    }

    for (const io::RowError& e : file.errors) log << path << ":" << e.line << ": " << e.message << "\n";

    json summary = {
        {"n_records", file.records.size()},
        {"n_row_errors", file.errors.size()},
        {"row_errors", json::array()},
        {"n_rollouts", total_rollouts},
        {"n_invalid_rollouts", total_invalid},
        {"n_records_without_valid_rollouts", unusable},
        {"invalid_mode", cfg.at("invalid_mode")},
        {"invalid_penalty", invalid.penalty},
        {"alpha_levels", alphas},
    };
    for (const io::RowError& e : file.errors) summary["row_errors"].push_back({{"line", e.line}, {"message", e.message}});
    if (!scored.empty()) {
        const DistributionScores ds = distribution_scores(scored, alphas);
        summary["mean_crps"] = ds.mean_crps;
        summary["mean_wis"] = ds.mean_wis;
        const BracketSummary br = bracket_rate(sets);
        summary["bracket_rate"] = br.rate;
    } else {
        summary["mean_crps"] = nullptr;
        summary["mean_wis"] = nullptr;
        summary["bracket_rate"] = nullptr;
    }

    const fs::path dir = out_dir(cfg);
    io::write_text_file(dir / "scores.csv", scores);
    io::write_text_file(dir / "rewards.csv", rewards);
    io::write_text_file(dir / "score_summary.json", io::dump(summary));
    log << "scored " << scored.size() << " of " << file.records.size() + file.errors.size() << " rows, "
        << total_invalid << " invalid rollouts\n";
    return !scored.empty();
}

void cmd_calib(const json& cfg, std::ostream& log) {
    const std::string rollouts = cfg.at("rollouts").get<std::string>();
    CalibrationReport report;
    if (!rollouts.empty()) {
        const io::RolloutFile file = io::read_rollouts(rollouts);
        for (const io::RowError& e : file.errors) log << rollouts << ":" << e.line << ": " << e.message << "\n";
        std::vector<CalibrationPoint> points;
        std::vector<double> targets;
        for (const auto& [line, record] : file.records) {
            const RolloutSet set = io::to_rollout_set(record);
            const std::vector<double> v = set.valid_predictions();
            if (v.empty()) continue;
            points.push_back({population_std(v), std::abs(mean_of(v) - set.target)});
            targets.push_back(set.target);
        }
        if (points.empty()) throw DataError("'" + rollouts + "' holds no row with a valid rollout");
        double scale = population_std(targets);
        if (!(scale > 0.0)) scale = 1.0;
        echo_config(cfg);
        report = calibration_fit(points, scale);
    } else {
        const EvalConfig ec = eval_config_from(cfg);
        const GridPolicy policy = read_policy(cfg);
        const Dataset data = read_split(cfg);
        echo_config(cfg);
        report = evaluate_calibration(policy, data, ec.n_samples, ec.seed);
    }
    const fs::path dir = out_dir(cfg);
    io::write_text_file(dir / "calibration.json", io::dump(io::calibration_to_json(report)));
    io::write_text_file(dir / "calibration_points.csv", io::calibration_points_csv(report));
    log << "calibration over " << report.n_points << " points"
        << (report.degenerate ? " (degenerate)" : "") << "\n";
}

int run(const std::string& command, const json& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (command == "gen-data") cmd_gen_data(cfg, log);
        else if (command == "train") cmd_train(cfg, log);
        else if (command == "eval") cmd_eval(cfg, log);
        else if (command == "score") return cmd_score(cfg, log) ? kOk : kData;
        else if (command == "calib") cmd_calib(cfg, log);
        else {
            err << "unknown command '" << command << "'\n";
            return kUsage;
        }
        return kOk;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        try {
            io::write_text_file(out_dir(cfg) / "numeric_failure.json", e.state_dump() + "\n");
            err << "state dump written to " << (out_dir(cfg) / "numeric_failure.json").string() << "\n";
        } catch (const std::exception&) {
        }
        return kNumeric;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kUsage;
    } catch (const json::exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    }
}

} // namespace dar::cli
