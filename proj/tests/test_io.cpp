#include <doctest.h>

#include <filesystem>

#include "dar/errors.hpp"
#include "dar/io.hpp"
#include "dar/synthetic.hpp"

using namespace dar;
using doctest::Approx;
using json = nlohmann::json;

TEST_CASE("dataset jsonl round trip") {
    const MixtureTaskSpec spec;
    const Dataset d = make_dataset(spec, 1, 12, 3).test;
    const std::string text = io::dataset_to_jsonl(d);
    CHECK(text.substr(0, 5) == "{\"x\":");
    const Dataset back = io::dataset_from_jsonl(text);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.records[i].x == d.records[i].x);
        CHECK(back.records[i].y == d.records[i].y);
        CHECK(back.records[i].region == d.records[i].region);
    }
    CHECK(io::dataset_to_jsonl(back) == text);
}

TEST_CASE("dataset parse errors name the line") {
    const std::string bad = "{\"x\":1,\"y\":2,\"region\":\"interp\"}\n{\"x\":1}\n";
    try {
        io::dataset_from_jsonl(bad, "f.jsonl");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("f.jsonl:2") != std::string::npos);
    }
    CHECK_THROWS_AS(io::read_dataset("/nonexistent/file.jsonl"), DataError);
}

TEST_CASE("rollout rows") {
    const auto file = io::rollouts_from_jsonl(
        "{\"id\":\"a\",\"target\":5,\"samples\":[3,4,8]}\n"
        "{\"id\":\"b\",\"target\":1,\"texts\":[\"\\\\boxed{1}\",\"no answer\"]}\n"
        "{\"id\":\"c\",\"target\":1}\n"
        "{\"id\":\"d\",\"target\":1,\"samples\":[1],\"texts\":[\"x\"]}\n"
        "not json\n"
        "\n"
        "{\"id\":\"e\",\"target\":\"one\",\"samples\":[1]}\n");
    REQUIRE(file.records.size() == 2);
    CHECK(file.records[0].first == 1);
    CHECK(file.records[1].first == 2);
    REQUIRE(file.errors.size() == 4);
    CHECK(file.errors[0].line == 3);
    CHECK(file.errors[1].line == 4);
    CHECK(file.errors[2].line == 5);
    CHECK(file.errors[3].line == 7);

    const RolloutSet s = io::to_rollout_set(file.records[1].second);
    CHECK(s.size() == 2);
    CHECK(s.valid == std::vector<bool>{true, false});
    CHECK(s.predictions[0] == 1.0);
}

TEST_CASE("checkpoint round trip") {
    GridPolicy p(BinGrid{-2.0, 2.0, 5}, BasisSpec{-4.0, 4.0, 3, 0.5}, 0.8);
    std::vector<double> w(p.weights().size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.1 * static_cast<double>(i) - 0.7 + 1e-17 * i;
    p.set_weights(w);
    TrainState st{p, GridPolicy(p.grid(), p.basis(), 0.8), 17, true, p, 10, 0.25, 1.5};
    const json j = io::checkpoint_to_json(p, 42, &st);
    CHECK(j.at("format") == "dar-grid-policy/1");
    const io::Checkpoint c = io::checkpoint_from_json(json::parse(io::dump(j)));
    CHECK(c.seed == 42);
    CHECK(c.policy.temperature() == 0.8);
    CHECK(c.policy.grid() == p.grid());
    CHECK(c.policy.basis() == p.basis());
    CHECK(std::equal(c.policy.weights().begin(), c.policy.weights().end(), w.begin(), w.end()));
    REQUIRE(c.state.has_value());
    CHECK(c.state->completed_steps == 17);
    CHECK(c.state->best_step == 10);
    CHECK(c.state->best_spearman == 0.25);
    CHECK(c.state->best_rmse == 1.5);

    const io::Checkpoint plain = io::checkpoint_from_json(io::checkpoint_to_json(p, 1, nullptr));
    CHECK_FALSE(plain.state.has_value());

    json broken = j;
    broken["weights"].erase(0);
    CHECK_THROWS_AS(io::checkpoint_from_json(broken), DataError);
}

TEST_CASE("csv helpers") {
    CHECK(io::csv_number(0.5) == "0.5");
    CHECK(io::csv_number(std::nan("")) == "");
    CHECK(io::csv_optional(std::nullopt) == "");
    TrainLog log;
    log.steps.push_back({1, -0.5, 0.25, 4.0, 0.0, 0.3, std::nullopt});
    const std::string csv = io::train_log_csv(log);
    CHECK(csv == "step,mean_reward,bracket_rate,entropy,kl,val_spearman,val_rmse\n1,-0.5,0.25,4,0,0.3,\n");
}
