#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "prn/config.hpp"
#include "prn/io.hpp"

using namespace prn;

TEST_CASE("doubles survive the shortest-decimal round trip") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(rng.uniform_sym(), static_cast<int>(rng.below(40)) - 20);
        CHECK(io::parse_double(io::fmt(v)) == v);
    }
    CHECK(io::fmt(0.1) == "0.1");
    CHECK_THROWS_AS(io::parse_double("abc"), FormatError);
}

TEST_CASE("sequence csv round-trips bitwise") {
    NoiseModel nm = NoiseModel::parabola_default(0.4, 5);
    const auto seq = sample({CurveKind::Parabola, 2.0, 4.0}, 0.1, 0.01, 30, nm);
    std::stringstream ss;
    write_sequence_csv(ss, seq);
    const auto back = read_sequence_csv(ss);
    REQUIRE(back.size() == seq.size());
    CHECK(back.t0 == seq.t0);
    // dt is reconstructed from the time column, so only near-exact
    CHECK(back.dt == Catch::Approx(seq.dt).epsilon(1e-12));
    for (std::size_t j = 0; j < seq.size(); ++j) {
        CHECK(back.points[j] == seq.points[j]);
        CHECK(back.truth[j] == seq.truth[j]);
    }
}

TEST_CASE("sequence csv rejects malformed input") {
    std::stringstream empty;
    CHECK_THROWS_AS(read_sequence_csv(empty), FormatError);
    std::stringstream bad("t,g_1,f_1\n0,0.1\n");
    CHECK_THROWS_AS(read_sequence_csv(bad), FormatError);
}

TEST_CASE("corpus file round-trips bitwise") {
    NoiseModel nm;
    nm.amplitude = 0.15;
    nm.seed = 9;
    const auto seq = sample({CurveKind::Sine}, 0.0, 0.01, 300, nm);
    auto corpus = build_training_corpus({seq}, 5, 50, 40, 10);
    corpus.source_descriptions = {"sine a=0.15"};
    std::stringstream ss;
    write_corpus(ss, corpus);
    const auto back = read_corpus(ss);
    REQUIRE(back.segments.size() == corpus.segments.size());
    CHECK(back.min_len == 5);
    CHECK(back.max_len == 50);
    CHECK(back.source_descriptions == corpus.source_descriptions);
    for (std::size_t i = 0; i < corpus.segments.size(); ++i) {
        const auto& a = corpus.segments[i];
        const auto& b = back.segments[i];
        REQUIRE(a.length() == b.length());
        for (int j = 0; j < a.length(); ++j)
            CHECK(a.input[static_cast<std::size_t>(j)] == b.input[static_cast<std::size_t>(j)]);
        CHECK(a.target == b.target);
    }
    std::stringstream wrong("prn-corpus 2\n");
    CHECK_THROWS_AS(read_corpus(wrong), FormatError);
}

TEST_CASE("checkpoint round-trips bitwise for both cells") {
    for (auto kind : {CellKind::Basic, CellKind::LSTM}) {
        const auto p = init_params(kind, 20, 2, 77);
        std::stringstream ss;
        save_checkpoint(ss, p, "trained on something");
        std::string meta;
        const auto q = load_checkpoint(ss, &meta);
        CHECK(meta == "trained on something");
        CHECK(q.cell == p.cell);
        CHECK(q.n == p.n);
        CHECK(q.d == p.d);
        CHECK(q.flatten() == p.flatten());
    }
}

TEST_CASE("checkpoint rejects corrupted headers") {
    std::stringstream bad1("prn-checkpoint 9\n");
    CHECK_THROWS_AS(load_checkpoint(bad1), FormatError);
    const auto p = init_params(CellKind::Basic, 4, 1, 3);
    std::stringstream ss;
    save_checkpoint(ss, p);
    std::string text = ss.str();
    text = text.substr(0, text.size() / 2); // truncate mid-array
    std::stringstream cut(text);
    CHECK_THROWS_AS(load_checkpoint(cut), FormatError);
}

TEST_CASE("training log csv shape") {
    TrainHistory hist;
    hist.epochs.push_back({0.5, 0.6, 2});
    hist.epochs.push_back({0.25, 0.3, 0});
    std::stringstream ss;
    write_training_log_csv(ss, hist);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "epoch,train_error,val_error,clip_events");
    std::getline(ss, line);
    CHECK(line == "1,0.5,0.6,2");
    std::getline(ss, line);
    CHECK(line == "2,0.25,0.3,0");
}

TEST_CASE("prediction csv carries metadata and truth columns") {
    const auto p = init_params(CellKind::Basic, 5, 1, 21);
    NoiseModel nm;
    nm.amplitude = 0.1;
    nm.seed = 22;
    const auto seq = sample({CurveKind::Sine}, 0.0, 0.01, 60, nm);
    std::span<const Vector> pts(seq.points);
    const auto run = predict_mw(p, std::vector<Vector>(pts.begin(), pts.begin() + 50), 10);
    std::stringstream ss;
    write_prediction_csv(ss, run, std::span<const Vector>(seq.truth).subspan(50), "ck1");
    std::string line;
    std::getline(ss, line);
    CHECK(line == "# algorithm=mw m=50 p=10 checkpoint=ck1");
    std::getline(ss, line);
    CHECK(line == "round,xbar_1,f_1");
    int rows = 0;
    while (std::getline(ss, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 10);
}

TEST_CASE("config json round-trips and validates") {
    ExperimentConfig cfg;
    cfg.name = "roundtrip";
    cfg.seed = 4242;
    cfg.trajectories = {{CurveKind::Sine}, {CurveKind::Triangle}};
    cfg.input_amplitudes = {0.15, 0.75};
    cfg.train.learning_rate = 2e-3;
    cfg.window_cap = 60;
    cfg.scatter_m_values = {10, 50};
    const auto back = parse_config(config_to_json(cfg));
    CHECK(back.name == cfg.name);
    CHECK(back.seed == cfg.seed);
    CHECK(back.trajectories.size() == 2);
    CHECK(back.input_amplitudes == cfg.input_amplitudes);
    CHECK(back.train.learning_rate == cfg.train.learning_rate);
    CHECK(back.window_cap == cfg.window_cap);
    CHECK(back.scatter_m_values == cfg.scatter_m_values);
}

TEST_CASE("config rejects unknown keys and bad values") {
    nlohmann::json j;
    j["trajectories"] = {{{"kind", "sine"}}};
    CHECK_NOTHROW(parse_config(j));

    j["typo_key"] = 1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j.erase("typo_key");

    j["train"] = {{"learning_rte", 0.1}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j.erase("train");

    j["trajectories"] = {{{"kind", "sine"}, {"h", 2.0}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j["trajectories"] = nlohmann::json::array();
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    // a parabola whose prediction run would leave the domain
    nlohmann::json k;
    k["trajectories"] = {{{"kind", "parabola"}, {"h", 1.0}, {"b", 1.0}}};
    k["predict"] = {{"m", 50}, {"p", 200}, {"t_start", 0.5}};
    CHECK_THROWS_AS(parse_config(k), ConfigError);
}

TEST_CASE("mixed-dimension trajectory lists are rejected") {
    nlohmann::json j;
    j["trajectories"] = {{{"kind", "sine"}},
                         {{"kind", "parabola"}, {"h", 1.0}, {"b", 1.0}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}
