#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dar/commands.hpp"
#include "dar/errors.hpp"
#include "dar/eval.hpp"
#include "dar/policy.hpp"
#include "dar/rewards.hpp"
#include "dar/scoring.hpp"
#include "dar/synthetic.hpp"
#include "dar/trainer.hpp"

namespace py = pybind11;

namespace {

dar::InvalidPolicy invalid_policy(const std::string& mode, double penalty) {
    dar::InvalidPolicy p;
    if (mode == "min_batch") p.mode = dar::InvalidMode::min_batch;
    else if (mode == "fixed") p.mode = dar::InvalidMode::fixed;
    else throw py::value_error("invalid_mode must be 'min_batch' or 'fixed'");
    p.penalty = penalty;
    return p;
}

dar::RolloutSet make_set(const std::vector<double>& predictions, double target,
                         const std::optional<std::vector<bool>>& valid) {
    dar::RolloutSet set;
    set.predictions = predictions;
    set.target = target;
    set.valid = valid ? *valid : std::vector<bool>(predictions.size(), true);
    return set;
}

py::dict dataset_dict(const dar::Dataset& d) {
    std::vector<double> x, y;
    std::vector<std::string> region;
    for (const auto& r : d.records) {
        x.push_back(r.x);
        y.push_back(r.y);
        region.emplace_back(dar::to_string(r.region));
    }
    py::dict out;
    out["x"] = x;
    out["y"] = y;
    out["region"] = region;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "CRPS scoring, leave-one-out distribution-aware rewards, and a toy grid-policy trainer.";

    py::register_exception<dar::DegenerateSetError>(m, "DegenerateSetError", PyExc_ValueError);
    py::register_exception<dar::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<dar::DataError>(m, "DataError", PyExc_RuntimeError);

    // scoring
    m.def("crps_empirical", [](const std::vector<double>& v, double y) {
        return dar::crps_empirical(dar::EmpiricalDistribution(v), y);
    }, py::arg("values"), py::arg("target"));
    m.def("neg_crps_score", [](const std::vector<double>& v, double y) {
        return dar::neg_crps_score(dar::EmpiricalDistribution(v), y);
    }, py::arg("values"), py::arg("target"));
    m.def("crps_integral_oracle", [](const std::vector<double>& v, double y) {
        return dar::crps_integral_oracle(dar::EmpiricalDistribution(v), y);
    }, py::arg("values"), py::arg("target"));
    m.def("quantile", [](const std::vector<double>& v, double level) {
        return dar::quantile(dar::EmpiricalDistribution(v), level);
    }, py::arg("values"), py::arg("level"));
    m.def("wis", [](const std::vector<double>& v, double y, const std::vector<double>& alphas) {
        return dar::wis(dar::EmpiricalDistribution(v), y, alphas);
    }, py::arg("values"), py::arg("target"), py::arg("alpha_levels") = dar::kDefaultWisAlphas);

    // rewards
    m.def("mse_reward", &dar::mse_reward, py::arg("prediction"), py::arg("target"));
    m.def("dar_rewards", [](const std::vector<double>& p, double y, const std::optional<std::vector<bool>>& valid,
                            const std::string& mode, double penalty) {
        return dar::dar_rewards(make_set(p, y, valid), invalid_policy(mode, penalty)).rewards;
    }, py::arg("predictions"), py::arg("target"), py::arg("valid") = py::none(),
       py::arg("invalid_mode") = "min_batch", py::arg("penalty") = -1.0);
    m.def("mse_rewards", [](const std::vector<double>& p, double y, const std::optional<std::vector<bool>>& valid,
                            const std::string& mode, double penalty) {
        return dar::mse_rewards(make_set(p, y, valid), invalid_policy(mode, penalty)).rewards;
    }, py::arg("predictions"), py::arg("target"), py::arg("valid") = py::none(),
       py::arg("invalid_mode") = "min_batch", py::arg("penalty") = -1.0);
    m.def("grpo_advantages", [](const std::vector<double>& r, double eps) { return dar::grpo_advantages(r, eps); },
          py::arg("rewards"), py::arg("epsilon") = 1e-8);

    // synthetic task (default constants)
    m.def("mixture_params", [](double x) {
        const auto p = dar::mixture_params(dar::MixtureTaskSpec{}, x);
        py::dict d;
        d["pi"] = p.pi;
        d["mu1"] = p.mu1;
        d["mu2"] = p.mu2;
        d["sigma"] = p.sigma;
        return d;
    }, py::arg("x"));
    m.def("true_mean", [](double x) { return dar::true_mean(dar::MixtureTaskSpec{}, x); }, py::arg("x"));
    m.def("make_dataset", [](std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
        const auto pair = dar::make_dataset(dar::MixtureTaskSpec{}, n_train, n_test, seed);
        py::dict out;
        out["train"] = dataset_dict(pair.train);
        out["test"] = dataset_dict(pair.test);
        return out;
    }, py::arg("n_train") = 1200, py::arg("n_test") = 600, py::arg("seed") = 7);

    // output format
    m.def("format_prediction", &dar::format_prediction, py::arg("value"));
    m.def("parse_prediction", [](const std::string& s) { return dar::parse_prediction(s); }, py::arg("text"));

    // metrics
    m.def("regression_metrics", [](const std::vector<double>& p, const std::vector<double>& t) {
        const auto r = dar::regression_metrics(p, t);
        py::dict d;
        d["rmse"] = r.rmse;
        d["mae"] = r.mae;
        d["spearman"] = r.spearman;
        return d;
    }, py::arg("predictions"), py::arg("targets"));
    m.def("calibration_fit", [](const std::vector<std::pair<double, double>>& pts, double scale) {
        std::vector<dar::CalibrationPoint> points;
        for (const auto& [s, e] : pts) points.push_back({s, e});
        const auto r = dar::calibration_fit(points, scale);
        py::dict d;
        d["log_pearson"] = r.log_pearson;
        d["n_points"] = r.n_points;
        d["n_excluded"] = r.n_excluded;
        d["degenerate"] = r.degenerate;
        return d;
    }, py::arg("points"), py::arg("target_scale") = 1.0);

    // policy
    py::class_<dar::GridPolicy>(m, "GridPolicy")
        .def(py::init<>())
        .def("probs", &dar::GridPolicy::probs, py::arg("x"))
        .def("features", &dar::GridPolicy::features, py::arg("x"))
        .def("entropy", [](const dar::GridPolicy& p, double x) { return dar::policy_entropy(p, x); }, py::arg("x"))
        .def("sample", [](const dar::GridPolicy& p, double x, std::size_t k, std::uint64_t seed) {
            dar::Rng rng(seed);
            return dar::sample_rollouts(p, x, k, rng).predictions;
        }, py::arg("x"), py::arg("k") = 12, py::arg("seed") = 0)
        .def_property_readonly("bin_centers", [](const dar::GridPolicy& p) { return p.grid().centers(); })
        .def_property_readonly("temperature", &dar::GridPolicy::temperature);

    // CLI commands with a flat config dict; returns (exit_code, log text)
    m.def("run_command", [](const std::string& command, const std::string& overrides_json) {
        std::ostringstream log;
        int code;
        try {
            const auto cfg = dar::cli::resolve_config(std::nullopt, nlohmann::json::parse(overrides_json));
            code = dar::cli::run(command, cfg, log, log);
        } catch (const std::exception& e) {
            log << "configuration error: " << e.what() << "\n";
            code = dar::cli::kUsage;
        }
        return std::make_pair(code, log.str());
    }, py::arg("command"), py::arg("overrides_json") = "{}");
}
