#include "dar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dar {

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

PointPrediction point_prediction(const GridPolicy& policy, double x, std::size_t n_samples, Rng& rng) {
    if (n_samples == 0) throw std::invalid_argument("point_prediction: n_samples must be >= 1");
    PointPrediction out;
    out.samples.reserve(n_samples);
    for (std::size_t b : sample_bins(policy, x, n_samples, rng)) out.samples.push_back(policy.grid().center(b));
    out.mean = mean_of(out.samples);
    out.std = population_std(out.samples);
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::domain_error("pearson: length mismatch");
    if (a.size() < 2) return std::nullopt;
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::domain_error("spearman: length mismatch");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    return pearson(ra, rb);
}

RegressionMetrics regression_metrics(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size())
        throw std::domain_error("regression_metrics: predictions and targets differ in length");
    if (predictions.empty()) throw std::domain_error("regression_metrics: empty input");
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        se += d * d;
        ae += std::abs(d);
    }
    const double n = static_cast<double>(predictions.size());
    RegressionMetrics out;
    out.rmse = std::sqrt(se / n);
    out.mae = ae / n;
    out.spearman = spearman(predictions, targets);
    return out;
}

bool brackets(const RolloutSet& set) {
    bool any = false;
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (!set.valid[k]) continue;
        const double p = set.predictions[k];
        if (!any) {
            lo = hi = p;
            any = true;
        } else {
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
    }
    return any && lo <= set.target && set.target <= hi;
}

BracketSummary bracket_rate(std::span<const RolloutSet> sets) {
    if (sets.empty()) throw std::domain_error("bracket_rate: no rollout sets");
    BracketSummary out;
    std::size_t hits = 0;
    for (const RolloutSet& s : sets) {
        if (s.valid_count() == 0) {
            ++out.n_excluded;
            continue;
        }
        ++out.n_used;
        if (brackets(s)) ++hits;
    }
    out.rate = out.n_used > 0 ? static_cast<double>(hits) / static_cast<double>(out.n_used) : 0.0;
    return out;
}

DistributionScores distribution_scores(std::span<const ScoredSamples> sets, std::span<const double> alpha_levels) {
    if (sets.empty()) throw std::domain_error("distribution_scores: no examples");
    DistributionScores out;
    for (const ScoredSamples& s : sets) {
        const EmpiricalDistribution dist(s.samples);
        out.mean_crps += crps_empirical(dist, s.target);
        out.mean_wis += wis(dist, s.target, alpha_levels);
    }
    out.mean_crps /= static_cast<double>(sets.size());
    out.mean_wis /= static_cast<double>(sets.size());
    return out;
}

CalibrationReport calibration_fit(std::span<const CalibrationPoint> points, double target_scale) {
    if (!(target_scale > 0.0)) throw std::domain_error("calibration_fit: target_scale must be positive");
    CalibrationReport out;
    std::vector<double> log_std, log_err;
    for (const CalibrationPoint& p : points) {
        const double s = p.std / target_scale;
        const double e = p.abs_error / target_scale;
        if (!(s > 0.0) || !(e > 0.0) || !std::isfinite(s) || !std::isfinite(e)) {
            ++out.n_excluded;
            continue;
        }
        out.points.push_back({s, e});
        log_std.push_back(std::log(s));
        log_err.push_back(std::log(e));
    }
    out.n_points = out.points.size();
    if (out.n_points < 3) {
        out.degenerate = true;
        return out;
    }
    const auto r = pearson(log_std, log_err);
    if (!r) {
        out.degenerate = true;
        return out;
    }
    out.log_pearson = *r;
    return out;
}

namespace {

struct Accumulator {
    std::vector<double> predictions, targets;
    double crps = 0.0, wis = 0.0;
    std::size_t bracketed = 0;

    SplitMetrics finish() const {
        SplitMetrics m;
        m.n = targets.size();
        if (m.n == 0) return m;
        const RegressionMetrics r = regression_metrics(predictions, targets);
        const double n = static_cast<double>(m.n);
        m.rmse = r.rmse;
        m.mae = r.mae;
        m.spearman = r.spearman;
        m.bracket_rate = static_cast<double>(bracketed) / n;
        m.mean_crps = crps / n;
        m.mean_wis = wis / n;
        return m;
    }
};

SplitMetrics average(const std::vector<SplitMetrics>& runs) {
    SplitMetrics out;
    if (runs.empty()) return out;
    out.n = runs.front().n;
    double rho = 0.0;
    std::size_t rho_count = 0;
    for (const SplitMetrics& m : runs) {
        out.rmse += m.rmse;
        out.mae += m.mae;
        out.bracket_rate += m.bracket_rate;
        out.mean_crps += m.mean_crps;
        out.mean_wis += m.mean_wis;
        if (m.spearman) {
            rho += *m.spearman;
            ++rho_count;
        }
    }
    const double n = static_cast<double>(runs.size());
    out.rmse /= n;
    out.mae /= n;
    out.bracket_rate /= n;
    out.mean_crps /= n;
    out.mean_wis /= n;
    if (rho_count > 0) out.spearman = rho / static_cast<double>(rho_count);
    return out;
}

std::uint64_t example_stream(std::size_t repeat, std::size_t index) {
    return (static_cast<std::uint64_t>(repeat) << 32) | static_cast<std::uint64_t>(index);
}

} // namespace

MetricsReport evaluate_policy(const GridPolicy& policy, const Dataset& data, const EvalConfig& config) {
    if (data.empty()) throw std::domain_error("evaluate_policy: empty dataset");
    if (config.n_samples == 0 || config.repeats == 0)
        throw std::invalid_argument("evaluate_policy: n_samples and repeats must be >= 1");

    std::vector<SplitMetrics> overall_runs;
    std::map<Region, std::vector<SplitMetrics>> region_runs;

    for (std::size_t r = 0; r < config.repeats; ++r) {
        Accumulator all;
        std::map<Region, Accumulator> by_region;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const Record& rec = data.records[i];
            Rng rng(config.seed, Stream::evaluation, example_stream(r, i));
            const PointPrediction pp = point_prediction(policy, rec.x, config.n_samples, rng);
            const EmpiricalDistribution dist(pp.samples);
            const double c = crps_empirical(dist, rec.y);
            const double w = wis(dist, rec.y, config.alpha_levels);
            const bool hit = dist.min() <= rec.y && rec.y <= dist.max();
            for (Accumulator* acc : {&all, &by_region[rec.region]}) {
                acc->predictions.push_back(pp.mean);
                acc->targets.push_back(rec.y);
                acc->crps += c;
                acc->wis += w;
                acc->bracketed += hit ? 1 : 0;
            }
        }
        overall_runs.push_back(all.finish());
        for (const auto& [region, acc] : by_region) region_runs[region].push_back(acc.finish());
    }

    MetricsReport report;
    report.overall = average(overall_runs);
    for (const auto& [region, runs] : region_runs) report.regions[region] = average(runs);
    report.n_examples = data.size();
    report.n_samples_per_example = config.n_samples;
    report.repeats = config.repeats;
    return report;
}

CalibrationReport evaluate_calibration(const GridPolicy& policy, const Dataset& data, std::size_t n_samples,
                                       std::uint64_t seed) {
    if (data.empty()) throw std::domain_error("evaluate_calibration: empty dataset");
    std::vector<double> targets;
    std::vector<CalibrationPoint> points;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Record& rec = data.records[i];
        Rng rng(seed, Stream::evaluation, example_stream(0, i));
        const PointPrediction pp = point_prediction(policy, rec.x, n_samples, rng);
        points.push_back({pp.std, std::abs(pp.mean - rec.y)});
        targets.push_back(rec.y);
    }
    double scale = population_std(targets);
    if (!(scale > 0.0)) scale = 1.0;
    return calibration_fit(points, scale);
}

} // namespace dar
