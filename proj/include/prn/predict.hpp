#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "prn/rnn.hpp"

namespace prn {

enum class Algorithm { MW, EW, ML };

inline std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::MW: return "mw";
        case Algorithm::EW: return "ew";
        case Algorithm::ML: return "ml";
    }
    throw std::logic_error("bad Algorithm");
}

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "mw") return Algorithm::MW;
    if (s == "ew") return Algorithm::EW;
    if (s == "ml") return Algorithm::ML;
    throw std::invalid_argument("unknown prediction algorithm: " + s);
}

struct PredictionRun {
    Algorithm algorithm = Algorithm::MW;
    std::vector<Vector> input;
    int horizon = 0;
    std::vector<Vector> predictions;
    std::vector<Vector> state_trace; // exposed state at the readout of each round
    std::optional<int> window_cap;   // EW only
};

namespace detail {
inline void check_rollout_args(std::span<const Vector> input, int p) {
    if (input.empty()) throw std::invalid_argument("rollout: empty input");
    if (p < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
}
} // namespace detail

/// The autonomous map H(s) = F(L(s), s): feed the readout of a state back
/// into the cell. Iterating H is what drives every rollout past round one.
inline InnerState autonomous_map(const NetworkParameters& params, const InnerState& s) {
    return cell_step(params, readout(params, s), s);
}

/// Moving window: drop the oldest point, append the newest prediction, keep
/// the window length fixed at m. Each round re-runs the window from the zero
/// state.
inline PredictionRun predict_mw(const NetworkParameters& params,
                                std::span<const Vector> input, int p) {
    detail::check_rollout_args(input, p);
    PredictionRun run;
    run.algorithm = Algorithm::MW;
    run.input.assign(input.begin(), input.end());
    run.horizon = p;
    std::vector<Vector> window(input.begin(), input.end());
    for (int k = 0; k < p; ++k) {
        const ForwardResult fr = forward(params, window);
        run.predictions.push_back(fr.prediction);
        run.state_trace.push_back(fr.states.back().h);
        window.erase(window.begin());
        window.push_back(fr.prediction);
    }
    return run;
}

/// Expanding window: append each prediction to the growing sequence.
/// Computed incrementally through the retained state, which reproduces the
/// from-scratch re-feed bit for bit. With a cap M the window stops growing
/// at length M and slides MW-style from then on.
inline PredictionRun predict_ew(const NetworkParameters& params,
                                std::span<const Vector> input, int p,
                                std::optional<int> cap = std::nullopt) {
    detail::check_rollout_args(input, p);
    const int m = static_cast<int>(input.size());
    if (cap && (*cap < 1 || m > *cap))
        throw std::invalid_argument("predict_ew: need 1 <= m <= cap");

    PredictionRun run;
    run.algorithm = Algorithm::EW;
    run.input.assign(input.begin(), input.end());
    run.horizon = p;
    run.window_cap = cap;

    std::vector<Vector> window(input.begin(), input.end());
    InnerState s = zero_state(params);
    for (const Vector& x : input) s = cell_step(params, x, s);

    bool growing = true;
    for (int k = 0; k < p; ++k) {
        const Vector pred = readout(params, s);
        run.predictions.push_back(pred);
        run.state_trace.push_back(s.h);
        if (growing && cap && static_cast<int>(window.size()) >= *cap) growing = false;
        if (growing) {
            window.push_back(pred);
            s = cell_step(params, pred, s);
        } else {
            // capped: slide the window and re-run it from the zero state
            window.erase(window.begin());
            window.push_back(pred);
            s = forward(params, window).states.back();
        }
    }
    return run;
}

namespace detail {
/// From-scratch EW reference: every round re-feeds the whole accumulated
/// sequence from the zero state. Used only as the dual-implementation test
/// oracle for the incremental path above.
inline PredictionRun predict_ew_from_scratch(const NetworkParameters& params,
                                             std::span<const Vector> input, int p) {
    check_rollout_args(input, p);
    PredictionRun run;
    run.algorithm = Algorithm::EW;
    run.input.assign(input.begin(), input.end());
    run.horizon = p;
    std::vector<Vector> seq(input.begin(), input.end());
    for (int k = 0; k < p; ++k) {
        const ForwardResult fr = forward(params, seq);
        run.predictions.push_back(fr.prediction);
        run.state_trace.push_back(fr.states.back().h);
        seq.push_back(fr.prediction);
    }
    return run;
}
} // namespace detail

/// Memoryless rollout: one pass over the input yields s_m, after which the
/// predictions are the readouts along the orbit of the autonomous map H.
/// Constant memory in p -- no window is stored.
inline PredictionRun predict_ml(const NetworkParameters& params,
                                std::span<const Vector> input, int p) {
    detail::check_rollout_args(input, p);
    PredictionRun run;
    run.algorithm = Algorithm::ML;
    run.input.assign(input.begin(), input.end());
    run.horizon = p;
    InnerState s = zero_state(params);
    for (const Vector& x : input) s = cell_step(params, x, s);
    for (int k = 0; k < p; ++k) {
        run.predictions.push_back(readout(params, s));
        run.state_trace.push_back(s.h);
        s = autonomous_map(params, s);
    }
    return run;
}

} // namespace prn
