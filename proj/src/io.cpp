#include "dar/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dar/errors.hpp"

namespace dar::io {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("read failure on '" + path.string() + "'");
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& contents) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw DataError("write failure on '" + path.string() + "'");
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

// --- datasets -------------------------------------------------------------

std::string dataset_to_jsonl(const Dataset& data) {
    std::string out;
    for (const Record& r : data.records) {
        // Fixed key order, independent of the json object's sorting.
        out += "{\"x\":" + format_double(r.x) + ",\"y\":" + format_double(r.y) + ",\"region\":\"" +
               to_string(r.region) + "\"}\n";
    }
    return out;
}

namespace {

double require_number(const json& row, const char* key, std::size_t line, const std::string& source) {
    const auto it = row.find(key);
    if (it == row.end() || !it->is_number())
        throw DataError(source + ":" + std::to_string(line) + ": field '" + key + "' must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v))
        throw DataError(source + ":" + std::to_string(line) + ": field '" + key + "' must be finite");
    return v;
}

template <typename F>
void for_each_line(const std::string& text, F&& f) {
    std::size_t line = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line;
        std::string_view s(text.data() + pos, end - pos);
        if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
        if (s.find_first_not_of(" \t") != std::string_view::npos) f(line, s);
        pos = end + 1;
    }
}

} // namespace

Dataset dataset_from_jsonl(const std::string& text, const std::string& source) {
    Dataset data;
    for_each_line(text, [&](std::size_t line, std::string_view s) {
        json row;
        try {
            row = json::parse(s);
        } catch (const json::parse_error& e) {
            throw DataError(source + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
        }
        if (!row.is_object()) throw DataError(source + ":" + std::to_string(line) + ": row must be an object");
        Record r;
        r.x = require_number(row, "x", line, source);
        r.y = require_number(row, "y", line, source);
        const auto it = row.find("region");
        if (it == row.end() || !it->is_string())
            throw DataError(source + ":" + std::to_string(line) + ": field 'region' must be a string");
        try {
            r.region = region_from_string(it->get<std::string>());
        } catch (const DataError& e) {
            throw DataError(source + ":" + std::to_string(line) + ": " + e.what());
        }
        data.records.push_back(r);
    });
    return data;
}

Dataset read_dataset(const fs::path& path) {
    return dataset_from_jsonl(read_text_file(path), path.string());
}

// --- rollouts -------------------------------------------------------------

RolloutRecord rollout_record_from_json(const json& row) {
    if (!row.is_object()) throw DataError("row must be a JSON object");
    RolloutRecord rec;

    if (const auto it = row.find("id"); it != row.end())
        rec.id = it->is_string() ? it->get<std::string>() : it->dump();

    const auto target = row.find("target");
    if (target == row.end() || !target->is_number()) throw DataError("field 'target' must be a number");
    rec.target = target->get<double>();
    if (!std::isfinite(rec.target)) throw DataError("field 'target' must be finite");

    const bool has_samples = row.contains("samples");
    const bool has_texts = row.contains("texts");
    if (has_samples && has_texts) throw DataError("row has both 'samples' and 'texts'; exactly one is allowed");
    if (!has_samples && !has_texts) throw DataError("row has neither 'samples' nor 'texts'; exactly one is required");

    if (has_samples) {
        const json& s = row.at("samples");
        if (!s.is_array()) throw DataError("field 'samples' must be an array of numbers");
        std::vector<double> values;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (!s[k].is_number())
                throw DataError("samples[" + std::to_string(k) + "] is not a number");
            const double v = s[k].get<double>();
            if (!std::isfinite(v)) throw DataError("samples[" + std::to_string(k) + "] is not finite");
            values.push_back(v);
        }
        rec.samples = std::move(values);
    } else {
        const json& t = row.at("texts");
        if (!t.is_array()) throw DataError("field 'texts' must be an array of strings");
        std::vector<std::string> texts;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (!t[k].is_string()) throw DataError("texts[" + std::to_string(k) + "] is not a string");
            texts.push_back(t[k].get<std::string>());
        }
        rec.texts = std::move(texts);
    }
    return rec;
}

RolloutFile rollouts_from_jsonl(const std::string& text) {
    RolloutFile file;
    for_each_line(text, [&](std::size_t line, std::string_view s) {
        try {
            const json row = json::parse(s);
            file.records.emplace_back(line, rollout_record_from_json(row));
        } catch (const json::parse_error&) {
            file.errors.push_back({line, "invalid JSON"});
        } catch (const DataError& e) {
            file.errors.push_back({line, e.what()});
        }
    });
    return file;
}

RolloutFile read_rollouts(const fs::path& path) {
    return rollouts_from_jsonl(read_text_file(path));
}

RolloutSet to_rollout_set(const RolloutRecord& record) {
    RolloutSet set;
    set.example_id = record.id;
    set.target = record.target;
    if (record.samples) {
        set.predictions = *record.samples;
        set.valid.assign(set.predictions.size(), true);
    } else if (record.texts) {
        for (const std::string& t : *record.texts) {
            const auto v = parse_prediction(t);
            set.predictions.push_back(v.value_or(0.0));
            set.valid.push_back(v.has_value());
        }
    }
    return set;
}

// --- checkpoints ----------------------------------------------------------

namespace {

json weights_to_json(const GridPolicy& p) {
    json rows = json::array();
    for (std::size_t b = 0; b < p.n_bins(); ++b) {
        json row = json::array();
        for (std::size_t m = 0; m < p.n_basis(); ++m) row.push_back(p.weight(b, m));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> weights_from_json(const json& rows, std::size_t n_bins, std::size_t n_basis) {
    if (!rows.is_array() || rows.size() != n_bins)
        throw DataError("checkpoint: 'weights' must hold " + std::to_string(n_bins) + " rows");
    std::vector<double> w;
    w.reserve(n_bins * n_basis);
    for (const json& row : rows) {
        if (!row.is_array() || row.size() != n_basis)
            throw DataError("checkpoint: every weight row must hold " + std::to_string(n_basis) + " entries");
        for (const json& v : row) {
            if (!v.is_number()) throw DataError("checkpoint: non-numeric weight");
            w.push_back(v.get<double>());
        }
    }
    return w;
}

} // namespace

json policy_to_json(const GridPolicy& policy) {
    const BinGrid& g = policy.grid();
    const BasisSpec& b = policy.basis();
    return json{
        {"grid", {{"lo", g.lo}, {"hi", g.hi}, {"count", g.count}}},
        {"basis", {{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"bandwidth", b.bandwidth}}},
        {"temperature", policy.temperature()},
        {"weights", weights_to_json(policy)},
    };
}

GridPolicy policy_from_json(const json& j) {
    try {
        BinGrid grid;
        grid.lo = j.at("grid").at("lo").get<double>();
        grid.hi = j.at("grid").at("hi").get<double>();
        grid.count = j.at("grid").at("count").get<std::size_t>();
        BasisSpec basis;
        basis.lo = j.at("basis").at("lo").get<double>();
        basis.hi = j.at("basis").at("hi").get<double>();
        basis.count = j.at("basis").at("count").get<std::size_t>();
        basis.bandwidth = j.at("basis").at("bandwidth").get<double>();
        GridPolicy p(grid, basis, j.at("temperature").get<double>());
        p.set_weights(weights_from_json(j.at("weights"), grid.count, basis.count));
        return p;
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
}

json checkpoint_to_json(const GridPolicy& policy, std::uint64_t seed, const TrainState* state) {
    json j = policy_to_json(policy);
    j["format"] = "dar-grid-policy/1";
    j["rng"] = {{"kind", "splitmix64-substreams"},
                {"seed", seed},
                {"completed_steps", state ? state->completed_steps : 0}};
    if (state) {
        json s;
        s["completed_steps"] = state->completed_steps;
        s["reference_weights"] = weights_to_json(state->reference);
        s["reference_temperature"] = state->reference.temperature();
        s["has_best"] = state->has_best;
        if (state->has_best) {
            s["best_step"] = state->best_step;
            s["best_spearman"] = state->best_spearman ? json(*state->best_spearman) : json(nullptr);
            s["best_rmse"] = state->best_rmse;
            s["best_weights"] = weights_to_json(state->best);
        }
        j["train_state"] = std::move(s);
    }
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint ck;
    ck.policy = policy_from_json(j);
    try {
        if (j.contains("rng")) ck.seed = j.at("rng").at("seed").get<std::uint64_t>();
        if (j.contains("train_state")) {
            const json& s = j.at("train_state");
            TrainState st;
            st.policy = ck.policy;
            st.completed_steps = s.at("completed_steps").get<std::size_t>();
            st.reference = GridPolicy(ck.policy.grid(), ck.policy.basis(), s.at("reference_temperature").get<double>());
            st.reference.set_weights(weights_from_json(s.at("reference_weights"), ck.policy.n_bins(), ck.policy.n_basis()));
            st.has_best = s.at("has_best").get<bool>();
            if (st.has_best) {
                st.best_step = s.at("best_step").get<std::size_t>();
                const json& rho = s.at("best_spearman");
                if (!rho.is_null()) st.best_spearman = rho.get<double>();
                st.best_rmse = s.at("best_rmse").get<double>();
                st.best = ck.policy;
                st.best.set_weights(weights_from_json(s.at("best_weights"), ck.policy.n_bins(), ck.policy.n_basis()));
            }
            ck.state = std::move(st);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
    return ck;
}

Checkpoint read_checkpoint(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw DataError("'" + path.string() + "': invalid JSON (" + e.what() + ")");
    }
    return checkpoint_from_json(j);
}

// --- CSV ------------------------------------------------------------------

std::string csv_number(double value) {
    if (std::isnan(value)) return "";
    return format_double(value);
}

std::string csv_optional(const std::optional<double>& value) {
    return value ? csv_number(*value) : std::string();
}

std::string train_log_csv(const TrainLog& log) {
    std::string out = "step,mean_reward,bracket_rate,entropy,kl,val_spearman,val_rmse\n";
    for (const StepRecord& r : log.steps) {
        out += std::to_string(r.step) + "," + csv_number(r.mean_reward) + "," + csv_number(r.bracket_rate) + "," +
               csv_number(r.mean_entropy) + "," + csv_number(r.mean_kl) + "," + csv_optional(r.val_spearman) + "," +
               csv_optional(r.val_rmse) + "\n";
    }
    return out;
}

namespace {

json split_to_json(const SplitMetrics& m) {
    return json{
        {"n", m.n},
        {"rmse", m.rmse},
        {"mae", m.mae},
        {"spearman", m.spearman ? json(*m.spearman) : json(nullptr)},
        {"bracket_rate", m.bracket_rate},
        {"mean_crps", m.mean_crps},
        {"mean_wis", m.mean_wis},
    };
}

std::string split_csv_row(const std::string& name, const SplitMetrics& m) {
    return name + "," + std::to_string(m.n) + "," + csv_number(m.rmse) + "," + csv_number(m.mae) + "," +
           csv_optional(m.spearman) + "," + csv_number(m.bracket_rate) + "," + csv_number(m.mean_crps) + "," +
           csv_number(m.mean_wis) + "\n";
}

} // namespace

json metrics_to_json(const MetricsReport& report) {
    json regions = json::object();
    for (const auto& [region, m] : report.regions) regions[to_string(region)] = split_to_json(m);
    json j = split_to_json(report.overall);
    j["n_examples"] = report.n_examples;
    j["n_samples_per_example"] = report.n_samples_per_example;
    j["repeats"] = report.repeats;
    j["regions"] = std::move(regions);
    return j;
}

std::string metrics_csv(const MetricsReport& report) {
    std::string out = "region,n,rmse,mae,spearman,bracket_rate,mean_crps,mean_wis\n";
    out += split_csv_row("all", report.overall);
    for (const auto& [region, m] : report.regions) out += split_csv_row(to_string(region), m);
    return out;
}

json calibration_to_json(const CalibrationReport& report) {
    return json{
        {"log_pearson", report.degenerate ? json(nullptr) : json(report.log_pearson)},
        {"n_points", report.n_points},
        {"n_excluded", report.n_excluded},
        {"degenerate", report.degenerate},
    };
}

std::string calibration_points_csv(const CalibrationReport& report) {
    std::string out = "normalized_std,normalized_error\n";
    for (const CalibrationPoint& p : report.points) out += csv_number(p.std) + "," + csv_number(p.abs_error) + "\n";
    return out;
}

} // namespace dar::io
