#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "prn/predict.hpp"
#include "prn/rnn.hpp"
#include "prn/trajectory.hpp"

namespace prn {

/// First-order noise propagation along a noiseless orbit: the sigma
/// recursion, the per-step spectral radii of the state Jacobian, and the
/// residual of the linear model against the true noisy forward pass.
/// Vectors live in the flattened state space (n for Basic, 2n for LSTM).
struct NoiseReport {
    std::vector<Vector> sigma_trace;
    std::vector<double> jacobian_sr;
    std::vector<double> residuals; // |s_i(noisy) - (s_hat_i + a*sigma_i)|
    double amplitude = 0.0;
};

/// How rough the rollout is relative to the noise that produced it.
/// rmse_input_vs_truth is only meaningful when the noisy continuation is
/// supplied; without it the ratio is left at 0.
struct SmoothnessReport {
    double rmse_pred_vs_truth = 0.0;
    double rmse_input_vs_truth = 0.0;
    double smoothness_ratio = 0.0;
    double max_deviation = 0.0;
    std::vector<double> per_step_deviation;
};

struct ScatterResult {
    std::vector<Vector> predictions; // one-step prediction per noisy realization
    Vector mean;
    Vector truth_target;
};

namespace detail {

using StepFn = std::function<Vector(const Vector& x, const Vector& s)>;
using JacFn = std::function<Matrix(const Vector& x, const Vector& s)>;

/// Generic sigma-recursion core over a flattened state map. Separated from
/// NetworkParameters so tests can drive it with exactly linear dynamics.
inline NoiseReport noise_propagation_core(const StepFn& step, const JacFn& jac_x,
                                          const JacFn& jac_s, int state_dim,
                                          std::span<const Vector> truth,
                                          std::span<const Vector> xi, double a) {
    if (truth.empty() || truth.size() != xi.size())
        throw std::invalid_argument("noise_propagation: truth and xi must match, nonempty");
    if (a < 0.0) throw std::invalid_argument("noise_propagation: amplitude must be >= 0");

    NoiseReport rep;
    rep.amplitude = a;
    Vector s_hat = Vector::Zero(state_dim);
    Vector s_noisy = s_hat;
    Vector sigma = Vector::Zero(state_dim);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const Vector& f = truth[i];
        const Matrix jx = jac_x(f, s_hat);
        const Matrix js = jac_s(f, s_hat);
        sigma = jx * xi[i] + js * sigma;
        s_hat = step(f, s_hat);
        s_noisy = step(Vector(f + a * xi[i]), s_noisy);
        rep.sigma_trace.push_back(sigma);
        rep.jacobian_sr.push_back(spectral_radius(js));
        rep.residuals.push_back((s_noisy - (s_hat + a * sigma)).norm());
    }
    return rep;
}

} // namespace detail

inline NoiseReport noise_propagation(const NetworkParameters& params,
                                     std::span<const Vector> truth,
                                     std::span<const Vector> xi, double a) {
    auto step = [&](const Vector& x, const Vector& s) {
        return cell_step(params, x, InnerState::from_flat(params, s)).flat();
    };
    auto jx = [&](const Vector& x, const Vector& s) {
        return jacobian_x(params, x, InnerState::from_flat(params, s));
    };
    auto js = [&](const Vector& x, const Vector& s) {
        return jacobian_s(params, x, InnerState::from_flat(params, s));
    };
    return detail::noise_propagation_core(step, jx, js, params.state_dim(), truth, xi, a);
}

/// Spectral radius of the state Jacobian at each step along the noiseless
/// orbit.
inline std::vector<double> contraction_profile(const NetworkParameters& params,
                                               std::span<const Vector> truth) {
    if (truth.empty()) throw std::invalid_argument("contraction_profile: empty input");
    std::vector<double> radii;
    radii.reserve(truth.size());
    InnerState s = zero_state(params);
    for (const Vector& f : truth) {
        radii.push_back(spectral_radius(jacobian_s(params, f, s)));
        s = cell_step(params, f, s);
    }
    return radii;
}

/// Largest singular values along the orbit; the companion diagnostic to
/// contraction_profile (spectral radius < 1 does not imply one-step norm
/// contraction for non-normal Jacobians).
inline std::vector<double> operator_norm_profile(const NetworkParameters& params,
                                                 std::span<const Vector> truth) {
    if (truth.empty()) throw std::invalid_argument("operator_norm_profile: empty input");
    std::vector<double> norms;
    norms.reserve(truth.size());
    InnerState s = zero_state(params);
    for (const Vector& f : truth) {
        const Matrix js = jacobian_s(params, f, s);
        Eigen::JacobiSVD<Matrix> svd(js);
        norms.push_back(svd.singularValues()(0));
        s = cell_step(params, f, s);
    }
    return norms;
}

/// RMSE of the rollout against the true continuation, and -- when the noisy
/// continuation is available -- the ratio against the noise RMSE itself.
inline SmoothnessReport smoothness(const PredictionRun& pred,
                                   std::span<const Vector> truth_continuation,
                                   std::span<const Vector> noisy_continuation = {}) {
    if (truth_continuation.size() != pred.predictions.size())
        throw std::invalid_argument("smoothness: truth length must equal horizon");
    if (!noisy_continuation.empty() &&
        noisy_continuation.size() != truth_continuation.size())
        throw std::invalid_argument("smoothness: noisy continuation length mismatch");

    SmoothnessReport rep;
    double acc = 0.0;
    for (std::size_t i = 0; i < truth_continuation.size(); ++i) {
        const double dev = (pred.predictions[i] - truth_continuation[i]).norm();
        rep.per_step_deviation.push_back(dev);
        rep.max_deviation = std::max(rep.max_deviation, dev);
        acc += dev * dev;
    }
    rep.rmse_pred_vs_truth =
        std::sqrt(acc / static_cast<double>(truth_continuation.size()));

    if (!noisy_continuation.empty()) {
        double nacc = 0.0;
        for (std::size_t i = 0; i < noisy_continuation.size(); ++i)
            nacc += (noisy_continuation[i] - truth_continuation[i]).squaredNorm();
        rep.rmse_input_vs_truth =
            std::sqrt(nacc / static_cast<double>(noisy_continuation.size()));
        rep.smoothness_ratio =
            rep.rmse_input_vs_truth > 0.0
                ? rep.rmse_pred_vs_truth / rep.rmse_input_vs_truth
                : 0.0;
    }
    return rep;
}

/// The averaging demonstration: K independent noisy realizations of one
/// fixed truth segment, each run through a one-step prediction. Per-trial
/// seeds derive from the master seed by stream index.
inline ScatterResult prediction_scatter(const NetworkParameters& params,
                                        const TrajectorySpec& spec, double t_start,
                                        double dt, int m, double a0, int trials,
                                        std::uint64_t seed,
                                        NoiseDistribution dist = NoiseDistribution::UniformSymmetric) {
    if (trials < 2) throw std::invalid_argument("prediction_scatter: need >= 2 trials");
    if (m < 1) throw std::invalid_argument("prediction_scatter: need m >= 1");

    ScatterResult res;
    res.truth_target = eval_smooth(spec, t_start + m * dt);
    res.mean = Vector::Zero(spec.dim());
    for (int k = 0; k < trials; ++k) {
        NoiseModel nm;
        nm.amplitude = a0;
        nm.distribution = dist;
        if (spec.kind == CurveKind::Parabola) nm.per_component_scale = {0.1, 1.0};
        nm.seed = derive_seed(seed, static_cast<std::uint64_t>(k));
        const NoisySequence seq = sample(spec, t_start, dt, m, nm);
        const Vector pred = forward(params, seq.points).prediction;
        res.predictions.push_back(pred);
        res.mean += pred;
    }
    res.mean /= static_cast<double>(trials);
    return res;
}

} // namespace prn
