#include <catch2/catch_amalgamated.hpp>

#include "prn/predict.hpp"

using namespace prn;

namespace {

std::vector<Vector> sine_input(int m, double noise_seed = 0) {
    Rng rng(static_cast<std::uint64_t>(noise_seed) + 1);
    std::vector<Vector> xs;
    for (int i = 0; i < m; ++i) {
        Vector v(1);
        v << std::sin(0.0628 * i) + (noise_seed > 0 ? 0.1 * rng.uniform_sym() : 0.0);
        xs.push_back(v);
    }
    return xs;
}

} // namespace

TEST_CASE("p=1: all three algorithms equal one forward pass") {
    for (auto kind : {CellKind::Basic, CellKind::LSTM}) {
        const auto p = init_params(kind, 8, 1, 5);
        const auto input = sine_input(20, 3);
        const Vector direct = forward(p, input).prediction;
        CHECK(predict_mw(p, input, 1).predictions[0] == direct);
        CHECK(predict_ew(p, input, 1).predictions[0] == direct);
        CHECK(predict_ml(p, input, 1).predictions[0] == direct);
    }
}

TEST_CASE("MW window content after k rounds") {
    const auto p = init_params(CellKind::Basic, 6, 1, 9);
    const auto input = sine_input(10);
    const auto run = predict_mw(p, input, 3);
    REQUIRE(run.predictions.size() == 3);
    // reconstruct the round-3 window: input[2..10) ++ predictions[0..2)
    std::vector<Vector> window(input.begin() + 2, input.end());
    window.push_back(run.predictions[0]);
    window.push_back(run.predictions[1]);
    CHECK(forward(p, window).prediction == run.predictions[2]);
}

TEST_CASE("ML equals EW for random networks") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto kind = trial % 2 == 0 ? CellKind::Basic : CellKind::LSTM;
        const auto p = init_params(kind, 5 + static_cast<int>(rng.below(16)), 1, rng.bits());
        const auto input = sine_input(5 + static_cast<int>(rng.below(30)), trial);
        const auto ml = predict_ml(p, input, 200);
        const auto ew = predict_ew(p, input, 200); // uncapped
        for (int k = 0; k < 200; ++k)
            CHECK((ml.predictions[static_cast<std::size_t>(k)] -
                   ew.predictions[static_cast<std::size_t>(k)])
                      .cwiseAbs()
                      .maxCoeff() <= 1e-9);
    }
}

TEST_CASE("incremental EW reproduces the from-scratch re-feed bitwise") {
    const auto p = init_params(CellKind::LSTM, 7, 1, 55);
    const auto input = sine_input(12, 4);
    const auto inc = predict_ew(p, input, 40);
    const auto scratch = detail::predict_ew_from_scratch(p, input, 40);
    for (int k = 0; k < 40; ++k) {
        CHECK(inc.predictions[static_cast<std::size_t>(k)] ==
              scratch.predictions[static_cast<std::size_t>(k)]);
        CHECK(inc.state_trace[static_cast<std::size_t>(k)] ==
              scratch.state_trace[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("EW cap freezes window growth") {
    const auto p = init_params(CellKind::Basic, 6, 1, 14);
    const auto input = sine_input(8);
    const auto run = predict_ew(p, input, 20, 10);
    REQUIRE(run.window_cap.has_value());
    CHECK(*run.window_cap == 10);
    // first rounds agree with uncapped EW (window still below the cap)
    const auto free_run = predict_ew(p, input, 20);
    CHECK(run.predictions[0] == free_run.predictions[0]);
    CHECK(run.predictions[1] == free_run.predictions[1]);
    // once capped the window slides MW-style at length 10: reconstruct
    // the final round from the preceding 10 points
    std::vector<Vector> all(input.begin(), input.end());
    for (const auto& x : run.predictions) all.push_back(x);
    std::vector<Vector> window(all.end() - 11, all.end() - 1);
    CHECK(forward(p, window).prediction == run.predictions.back());

    CHECK_THROWS_AS(predict_ew(p, input, 5, 4), std::invalid_argument);
}

TEST_CASE("autonomous map fixed point emits a constant") {
    // zero Basic parameters: H(s) = 0 for all s, and the rollout emits b_out
    auto p = NetworkParameters::shaped(CellKind::Basic, 5, 1);
    p.b_out << 0.25;
    Rng rng(3);
    InnerState s = zero_state(p);
    for (int i = 0; i < 5; ++i) s.h(i) = rng.uniform_sym();
    CHECK(autonomous_map(p, s).h.isZero());

    const auto run = predict_ml(p, sine_input(6), 10);
    for (int k = 1; k < 10; ++k)
        CHECK(run.predictions[static_cast<std::size_t>(k)](0) == 0.25);
}

TEST_CASE("ML rollout is the orbit of the autonomous map") {
    const auto p = init_params(CellKind::LSTM, 6, 2, 91);
    Rng rng(92);
    std::vector<Vector> input;
    for (int i = 0; i < 9; ++i) {
        Vector v(2);
        v << rng.uniform_sym(), rng.uniform_sym();
        input.push_back(v);
    }
    const auto run = predict_ml(p, input, 15);
    InnerState s = zero_state(p);
    for (const auto& x : input) s = cell_step(p, x, s);
    for (int k = 0; k < 15; ++k) {
        CHECK(run.state_trace[static_cast<std::size_t>(k)] == s.h);
        CHECK(run.predictions[static_cast<std::size_t>(k)] == readout(p, s));
        s = autonomous_map(p, s);
    }
}

TEST_CASE("rollouts are deterministic and validate their arguments") {
    const auto p = init_params(CellKind::Basic, 5, 1, 1);
    const auto input = sine_input(7, 2);
    const auto a = predict_mw(p, input, 25);
    const auto b = predict_mw(p, input, 25);
    for (int k = 0; k < 25; ++k)
        CHECK(a.predictions[static_cast<std::size_t>(k)] ==
              b.predictions[static_cast<std::size_t>(k)]);

    CHECK_THROWS_AS(predict_mw(p, std::vector<Vector>{}, 3), std::invalid_argument);
    CHECK_THROWS_AS(predict_ml(p, input, 0), std::invalid_argument);
}
