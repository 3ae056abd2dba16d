#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "prn/rnn.hpp"
#include "prn/trajectory.hpp"

namespace prn {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double validation_fraction = 0.2;
    std::uint64_t shuffle_seed = 0;
    double clip_norm = 5.0; // global-norm gradient clip; <= 0 disables

    void validate() const {
        if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
        if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
        if (validation_fraction < 0.0 || validation_fraction >= 1.0)
            throw std::invalid_argument("train: validation_fraction must be in [0,1)");
    }
};

struct EpochRecord {
    double train_error = 0.0;
    double validation_error = 0.0;
    int clip_events = 0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    NetworkParameters final_params;
};

struct DivergenceError : std::runtime_error {
    int epoch;
    int batch;
    DivergenceError(int e, int b)
        : std::runtime_error("training diverged (non-finite loss) at epoch " +
                             std::to_string(e) + ", batch " + std::to_string(b)),
          epoch(e), batch(b) {}
};

/// E_tr: mean over segments of |prediction - target|^2.
inline double loss(const NetworkParameters& p, std::span<const Segment> segments) {
    if (segments.empty()) throw std::invalid_argument("loss: empty segment set");
    double acc = 0.0;
    InnerState s;
    for (const Segment& seg : segments) {
        s = zero_state(p);
        for (const Vector& x : seg.input) s = cell_step(p, x, s);
        acc += (readout(p, s) - seg.target).squaredNorm();
    }
    return acc / static_cast<double>(segments.size());
}

/// Exact gradient of the single-segment squared error via backpropagation
/// through time. Layout matches NetworkParameters::flatten.
inline Vector backward(const NetworkParameters& p, const Segment& seg) {
    const int m = seg.length();
    if (m == 0) throw std::invalid_argument("backward: empty segment input");

    NetworkParameters g = NetworkParameters::shaped(p.cell, p.n, p.d);

    if (p.cell == CellKind::Basic) {
        // forward, keeping all states
        std::vector<Vector> states(static_cast<std::size_t>(m));
        Vector h = Vector::Zero(p.n);
        for (int i = 0; i < m; ++i) {
            h = (p.w_x * seg.input[static_cast<std::size_t>(i)] + p.w_s * h + p.b_s)
                    .array().tanh();
            states[static_cast<std::size_t>(i)] = h;
        }
        const Vector e = 2.0 * (p.w_out * h + p.b_out - seg.target);
        g.w_out = e * h.transpose();
        g.b_out = e;
        Vector dh = p.w_out.transpose() * e;
        for (int i = m - 1; i >= 0; --i) {
            const Vector& si = states[static_cast<std::size_t>(i)];
            const Vector da = dh.cwiseProduct(Vector(1.0 - si.array().square()));
            const Vector h_prev =
                i > 0 ? states[static_cast<std::size_t>(i - 1)] : Vector(Vector::Zero(p.n));
            g.w_x += da * seg.input[static_cast<std::size_t>(i)].transpose();
            g.w_s += da * h_prev.transpose();
            g.b_s += da;
            dh = p.w_s.transpose() * da;
        }
        return g.flatten();
    }

    // LSTM
    std::vector<detail::LstmStepTrace> trace(static_cast<std::size_t>(m));
    std::vector<Vector> h_prevs(static_cast<std::size_t>(m));
    std::vector<Vector> c_prevs(static_cast<std::size_t>(m));
    Vector h = Vector::Zero(p.n), c = Vector::Zero(p.n);
    for (int i = 0; i < m; ++i) {
        h_prevs[static_cast<std::size_t>(i)] = h;
        c_prevs[static_cast<std::size_t>(i)] = c;
        trace[static_cast<std::size_t>(i)] =
            detail::lstm_step_trace(p, seg.input[static_cast<std::size_t>(i)], h, c);
        h = trace[static_cast<std::size_t>(i)].h_new;
        c = trace[static_cast<std::size_t>(i)].c_new;
    }
    const Vector e = 2.0 * (p.w_out * h + p.b_out - seg.target);
    g.w_out = e * h.transpose();
    g.b_out = e;
    Vector dh = p.w_out.transpose() * e;
    Vector dc = Vector::Zero(p.n);
    for (int i = m - 1; i >= 0; --i) {
        const auto& t = trace[static_cast<std::size_t>(i)];
        const Vector& x = seg.input[static_cast<std::size_t>(i)];
        const Vector& hp = h_prevs[static_cast<std::size_t>(i)];
        const Vector& cp = c_prevs[static_cast<std::size_t>(i)];

        const Vector d_go = dh.cwiseProduct(t.tanh_c_new);
        dc += dh.cwiseProduct(t.go).cwiseProduct(
            Vector(1.0 - t.tanh_c_new.array().square()));

        const Vector d_gi = dc.cwiseProduct(t.gc);
        const Vector d_gf = dc.cwiseProduct(cp);
        const Vector d_gc = dc.cwiseProduct(t.gi);
        const Vector dc_prev = dc.cwiseProduct(t.gf);

        const Vector dzi = d_gi.cwiseProduct(t.gi).cwiseProduct(Vector(1.0 - t.gi.array()));
        const Vector dzf = d_gf.cwiseProduct(t.gf).cwiseProduct(Vector(1.0 - t.gf.array()));
        const Vector dzo = d_go.cwiseProduct(t.go).cwiseProduct(Vector(1.0 - t.go.array()));
        const Vector dzg = d_gc.cwiseProduct(Vector(1.0 - t.gc.array().square()));

        auto accumulate = [&](int gate, const Vector& dz) {
            g.gates[static_cast<std::size_t>(gate)].u += dz * x.transpose();
            g.gates[static_cast<std::size_t>(gate)].v += dz * hp.transpose();
            g.gates[static_cast<std::size_t>(gate)].c += dz;
        };
        accumulate(kGateInput, dzi);
        accumulate(kGateForget, dzf);
        accumulate(kGateOutput, dzo);
        accumulate(kGateCandidate, dzg);

        dh = p.gates[kGateInput].v.transpose() * dzi +
             p.gates[kGateForget].v.transpose() * dzf +
             p.gates[kGateOutput].v.transpose() * dzo +
             p.gates[kGateCandidate].v.transpose() * dzg;
        dc = dc_prev;
    }
    return g.flatten();
}

/// Central-difference gradient of the single-segment squared error; the
/// independent oracle for backward().
inline Vector finite_diff_grad(const NetworkParameters& p, const Segment& seg, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be > 0");
    const Vector theta = p.flatten();
    Vector grad(theta.size());
    auto seg_loss = [&](const Vector& th) {
        const NetworkParameters q = NetworkParameters::unflatten(p.cell, p.n, p.d, th);
        InnerState s = zero_state(q);
        for (const Vector& x : seg.input) s = cell_step(q, x, s);
        return (readout(q, s) - seg.target).squaredNorm();
    };
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        Vector tp = theta, tm = theta;
        tp(k) += eps;
        tm(k) -= eps;
        grad(k) = (seg_loss(tp) - seg_loss(tm)) / (2.0 * eps);
    }
    return grad;
}

struct AdamState {
    Vector m; // first moment
    Vector v; // second moment
    long step = 0;

    static AdamState fresh(int param_count) {
        AdamState s;
        s.m = Vector::Zero(param_count);
        s.v = Vector::Zero(param_count);
        return s;
    }
};

/// One Adam update with bias correction; returns the updated parameters.
inline NetworkParameters adam_step(const NetworkParameters& p, const Vector& grad,
                                   AdamState& state, const TrainConfig& cfg) {
    if (grad.size() != p.param_count() || state.m.size() != grad.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.step += 1;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    const Vector m_hat = state.m / bc1;
    const Vector v_hat = state.v / bc2;
    Vector theta = p.flatten();
    theta -= cfg.learning_rate *
             m_hat.cwiseQuotient(Vector(v_hat.cwiseSqrt().array() + cfg.epsilon));
    return NetworkParameters::unflatten(p.cell, p.n, p.d, theta);
}

/// Full seq-to-one training loop. Deterministic in shuffle_seed: one split
/// up front, per-epoch shuffle, batches bucketed by exact segment length so
/// no padding is needed, mean-gradient Adam updates with global-norm clipping.
inline TrainHistory train(const NetworkParameters& init, const TrainingCorpus& corpus,
                          const TrainConfig& cfg) {
    cfg.validate();
    const auto total = corpus.segments.size();
    if (total < 2) throw std::invalid_argument("train: corpus too small");

    Rng rng(derive_seed(cfg.shuffle_seed, 0));

    // one-time split: shuffle indices, hold out the tail
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = total - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    const auto n_val = static_cast<std::size_t>(
        cfg.validation_fraction * static_cast<double>(total));
    if (cfg.validation_fraction > 0.0 && (n_val == 0 || n_val == total))
        throw std::invalid_argument("train: split leaves an empty side");
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<long>(n_val));
    std::vector<std::size_t> val_idx(order.end() - static_cast<long>(n_val), order.end());

    std::vector<Segment> val_segments;
    val_segments.reserve(val_idx.size());
    for (auto i : val_idx) val_segments.push_back(corpus.segments[i]);
    std::vector<Segment> train_view;
    train_view.reserve(train_idx.size());
    for (auto i : train_idx) train_view.push_back(corpus.segments[i]);

    NetworkParameters params = init;
    AdamState opt = AdamState::fresh(params.param_count());
    TrainHistory history;
    history.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

    std::vector<std::size_t> epoch_order(train_idx.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(epoch_order.begin(), epoch_order.end(), std::size_t{0});
        for (std::size_t i = epoch_order.size() - 1; i > 0; --i)
            std::swap(epoch_order[i], epoch_order[rng.below(i + 1)]);

        // bucket by exact length, preserving shuffled order inside buckets
        std::map<int, std::vector<std::size_t>> buckets;
        for (auto i : epoch_order) buckets[train_view[i].length()].push_back(i);

        // visit batches in shuffled order: sweeping lengths low-to-high every
        // epoch imposes a systematic curriculum that hurts the optimizer
        std::vector<std::pair<int, std::size_t>> batches; // (length, offset in bucket)
        for (const auto& [len, idxs] : buckets)
            for (std::size_t at = 0; at < idxs.size();
                 at += static_cast<std::size_t>(cfg.batch_size))
                batches.emplace_back(len, at);
        for (std::size_t i = batches.size() - 1; i > 0; --i)
            std::swap(batches[i], batches[rng.below(i + 1)]);

        int clip_events = 0;
        int batch_index = 0;
        for (const auto& [len, at] : batches) {
            const auto& idxs = buckets[len];
            const auto end = std::min(idxs.size(), at + static_cast<std::size_t>(cfg.batch_size));
            Vector grad = Vector::Zero(params.param_count());
            for (std::size_t j = at; j < end; ++j)
                grad += backward(params, train_view[idxs[j]]);
            grad /= static_cast<double>(end - at);
            if (!grad.allFinite()) throw DivergenceError(epoch, batch_index);
            if (cfg.clip_norm > 0.0) {
                const double gn = grad.norm();
                if (gn > cfg.clip_norm) {
                    grad *= cfg.clip_norm / gn;
                    ++clip_events;
                }
            }
            params = adam_step(params, grad, opt, cfg);
            ++batch_index;
        }

        EpochRecord rec;
        rec.clip_events = clip_events;
        rec.train_error = loss(params, train_view);
        rec.validation_error = val_segments.empty() ? 0.0 : loss(params, val_segments);
        if (!std::isfinite(rec.train_error)) throw DivergenceError(epoch, -1);
        history.epochs.push_back(rec);
    }
    history.final_params = params;
    return history;
}

} // namespace prn
