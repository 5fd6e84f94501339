#include "dar/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "dar/errors.hpp"

namespace dar {

std::vector<double> BinGrid::centers() const {
    std::vector<double> out(count);
    for (std::size_t b = 0; b < count; ++b) out[b] = center(b);
    return out;
}

std::size_t BinGrid::nearest(double value) const {
    if (!(value > lo)) return 0;
    if (!(value < hi)) return count - 1;
    const auto b = static_cast<std::size_t>(std::lround((value - lo) / width()));
    return std::min(b, count - 1);
}

double BasisSpec::center(std::size_t m) const {
    if (count == 1) return 0.5 * (lo + hi);
    return lo + static_cast<double>(m) * (hi - lo) / static_cast<double>(count - 1);
}

GridPolicy::GridPolicy(BinGrid grid, BasisSpec basis, double temperature)
    : grid_(grid), basis_(basis) {
    if (grid_.count < 2 || !(grid_.lo < grid_.hi)) throw ConfigError("bin grid needs >= 2 bins over a nonempty range");
    if (basis_.count < 1 || !(basis_.lo <= basis_.hi)) throw ConfigError("basis needs >= 1 bump over a valid range");
    if (!(basis_.bandwidth > 0.0)) throw ConfigError("basis bandwidth must be positive");
    set_temperature(temperature);
    weights_.assign(grid_.count * basis_.count, 0.0);
}

void GridPolicy::set_temperature(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("temperature must be positive");
    temperature_ = t;
}

void GridPolicy::set_weights(std::vector<double> w) {
    if (w.size() != weights_.size())
        throw ConfigError("weight matrix has " + std::to_string(w.size()) + " entries, expected " +
                          std::to_string(weights_.size()));
    weights_ = std::move(w);
}

std::vector<double> GridPolicy::features(double x) const {
    std::vector<double> phi(basis_.count);
    const double inv = 1.0 / (2.0 * basis_.bandwidth * basis_.bandwidth);
    for (std::size_t m = 0; m < basis_.count; ++m) {
        const double d = x - basis_.center(m);
        phi[m] = std::exp(-d * d * inv);
    }
    return phi;
}

std::vector<double> GridPolicy::logits(double x) const {
    const std::vector<double> phi = features(x);
    std::vector<double> z(grid_.count, 0.0);
    for (std::size_t b = 0; b < grid_.count; ++b) {
        const double* row = weights_.data() + b * basis_.count;
        double acc = 0.0;
        for (std::size_t m = 0; m < basis_.count; ++m) acc += row[m] * phi[m];
        z[b] = acc / temperature_;
    }
    return z;
}

std::vector<double> GridPolicy::probs(double x) const {
    const std::vector<double> z = logits(x);
    return softmax(z);
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    if (out.empty()) return out;
    const double top = *std::max_element(out.begin(), out.end());
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : out) v /= total;
    return out;
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double q : probs)
        if (q > 0.0) h -= q * std::log(q);
    return h;
}

double kl_divergence(std::span<const double> q, std::span<const double> r) {
    if (q.size() != r.size()) throw ConfigError("KL: distributions have different support sizes");
    double kl = 0.0;
    for (std::size_t b = 0; b < q.size(); ++b)
        if (q[b] > 0.0) kl += q[b] * (std::log(q[b]) - std::log(r[b]));
    return std::max(kl, 0.0);
}

std::vector<std::size_t> sample_bins(const GridPolicy& policy, double x, std::size_t k, Rng& rng) {
    const std::vector<double> q = policy.probs(x);
    std::vector<std::size_t> bins(k);
    for (auto& b : bins) b = rng.categorical(q);
    return bins;
}

RolloutSet sample_rollouts(const GridPolicy& policy, double x, std::size_t k, Rng& rng, double target,
                           std::string example_id) {
    RolloutSet set;
    set.example_id = std::move(example_id);
    set.target = target;
    for (std::size_t b : sample_bins(policy, x, k, rng)) set.predictions.push_back(policy.grid().center(b));
    set.valid.assign(k, true);
    return set;
}

double policy_entropy(const GridPolicy& policy, double x) {
    const std::vector<double> q = policy.probs(x);
    return entropy(q);
}

double kl_to_reference(const GridPolicy& policy, const ReferencePolicy& ref, double x) {
    if (!(policy.grid() == ref.policy().grid()))
        throw ConfigError("policy and reference use different bin grids");
    const std::vector<double> q = policy.probs(x);
    const std::vector<double> r = ref.probs(x);
    return kl_divergence(q, r);
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_prediction(double value) {
    return "\\boxed{" + format_double(value) + "}";
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// [+-]? (digits [. digits?] | . digits) ([eE] [+-]? digits)?, surrounding
// spaces allowed.
std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;

    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') {
        negative = s[i] == '-';
        ++i;
    }
    const std::size_t body = i;
    std::size_t int_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
    std::size_t frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i, ++frac_digits;
    }
    if (int_digits + frac_digits == 0) return std::nullopt;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        std::size_t exp_digits = 0;
        while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
        if (exp_digits == 0) return std::nullopt;
    }
    if (i != s.size()) return std::nullopt;

    double value = 0.0;
    const char* first = s.data() + body;
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) return std::nullopt;
    return negative ? -value : value;
}

} // namespace

std::optional<double> parse_prediction(std::string_view text) noexcept {
    constexpr std::string_view open = "\\boxed{";
    std::optional<double> found;
    std::size_t pos = text.find(open);
    while (pos != std::string_view::npos) {
        const std::size_t start = pos + open.size();
        const std::size_t close = text.find('}', start);
        if (close == std::string_view::npos) break;
        if (auto v = parse_number(text.substr(start, close - start))) found = v;
        pos = text.find(open, start);
    }
    return found;
}

} // namespace dar
