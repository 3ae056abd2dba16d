#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "prn/linalg.hpp"
#include "prn/rng.hpp"

namespace prn {

enum class CellKind { Basic, LSTM };

inline std::string to_string(CellKind k) {
    return k == CellKind::Basic ? "basic" : "lstm";
}

inline CellKind cell_kind_from_string(const std::string& s) {
    if (s == "basic") return CellKind::Basic;
    if (s == "lstm") return CellKind::LSTM;
    throw std::invalid_argument("unknown cell kind: " + s);
}

// LSTM gate order used everywhere (storage, flattening, gradients).
enum : int { kGateInput = 0, kGateForget = 1, kGateOutput = 2, kGateCandidate = 3 };

/// All trainable weights: the recurrent cell plus the linear readout.
///
/// Flattened parameter layout (row-major matrices, fixed order):
///   Basic: W_x (n*d), W_s (n*n), b_s (n), W (d*n), b (d)
///   LSTM:  gates in order input, forget, output, candidate, each as
///          U (n*d), V (n*n), c (n); then W (d*n), b (d)
struct NetworkParameters {
    struct GateBlock {
        Matrix u; // n x d
        Matrix v; // n x n
        Vector c; // n
    };

    CellKind cell = CellKind::Basic;
    int n = 0;
    int d = 1;

    // Basic cell
    Matrix w_x; // n x d
    Matrix w_s; // n x n
    Vector b_s; // n

    // LSTM cell
    std::array<GateBlock, 4> gates;

    // readout
    Matrix w_out; // d x n
    Vector b_out; // d

    /// Exposed-plus-carry state dimension: n for Basic, 2n for LSTM.
    int state_dim() const { return cell == CellKind::LSTM ? 2 * n : n; }

    int param_count() const {
        const int readout = d * n + d;
        if (cell == CellKind::Basic) return n * d + n * n + n + readout;
        return 4 * (n * d + n * n + n) + readout;
    }

    Vector flatten() const {
        Vector out(param_count());
        Eigen::Index at = 0;
        auto put_m = [&](const Matrix& m) {
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) out(at++) = m(r, c);
        };
        auto put_v = [&](const Vector& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i) out(at++) = v(i);
        };
        if (cell == CellKind::Basic) {
            put_m(w_x);
            put_m(w_s);
            put_v(b_s);
        } else {
            for (const auto& g : gates) {
                put_m(g.u);
                put_m(g.v);
                put_v(g.c);
            }
        }
        put_m(w_out);
        put_v(b_out);
        return out;
    }

    static NetworkParameters unflatten(CellKind cell, int n, int d, const Vector& theta) {
        NetworkParameters p = shaped(cell, n, d);
        if (theta.size() != p.param_count())
            throw std::invalid_argument("unflatten: wrong parameter vector size");
        Eigen::Index at = 0;
        auto get_m = [&](Matrix& m) {
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = theta(at++);
        };
        auto get_v = [&](Vector& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = theta(at++);
        };
        if (cell == CellKind::Basic) {
            get_m(p.w_x);
            get_m(p.w_s);
            get_v(p.b_s);
        } else {
            for (auto& g : p.gates) {
                get_m(g.u);
                get_m(g.v);
                get_v(g.c);
            }
        }
        get_m(p.w_out);
        get_v(p.b_out);
        return p;
    }

    /// Correctly shaped, zero-filled parameters.
    static NetworkParameters shaped(CellKind cell, int n, int d) {
        if (n < 1) throw std::invalid_argument("network: n must be >= 1");
        if (d != 1 && d != 2) throw std::invalid_argument("network: d must be 1 or 2");
        NetworkParameters p;
        p.cell = cell;
        p.n = n;
        p.d = d;
        if (cell == CellKind::Basic) {
            p.w_x = Matrix::Zero(n, d);
            p.w_s = Matrix::Zero(n, n);
            p.b_s = Vector::Zero(n);
        } else {
            for (auto& g : p.gates) {
                g.u = Matrix::Zero(n, d);
                g.v = Matrix::Zero(n, n);
                g.c = Vector::Zero(n);
            }
        }
        p.w_out = Matrix::Zero(d, n);
        p.b_out = Vector::Zero(d);
        return p;
    }
};

/// Recurrent state: s for the Basic cell, (h, c) for LSTM. The exposed state
/// seen by the readout is s / h.
struct InnerState {
    Vector h; // exposed state
    Vector c; // LSTM carry; size 0 for Basic

    /// Flatten as (h; c) -- the extended-state convention used by the
    /// noise-propagation analysis.
    Vector flat() const {
        if (c.size() == 0) return h;
        Vector out(h.size() + c.size());
        out << h, c;
        return out;
    }

    static InnerState from_flat(const NetworkParameters& p, const Vector& v) {
        InnerState s;
        if (p.cell == CellKind::Basic) {
            if (v.size() != p.n) throw std::invalid_argument("from_flat: bad size");
            s.h = v;
        } else {
            if (v.size() != 2 * p.n) throw std::invalid_argument("from_flat: bad size");
            s.h = v.head(p.n);
            s.c = v.tail(p.n);
        }
        return s;
    }
};

inline InnerState zero_state(const NetworkParameters& p) {
    InnerState s;
    s.h = Vector::Zero(p.n);
    if (p.cell == CellKind::LSTM) s.c = Vector::Zero(p.n);
    return s;
}

/// Weights uniform on [-1/sqrt(n), 1/sqrt(n)], biases zero except the LSTM
/// forget-gate bias, which starts at 1.
inline NetworkParameters init_params(CellKind cell, int n, int d, std::uint64_t seed) {
    NetworkParameters p = NetworkParameters::shaped(cell, n, d);
    Rng rng(seed);
    const double r = 1.0 / std::sqrt(static_cast<double>(n));
    auto fill = [&](Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r * rng.uniform_sym();
    };
    if (cell == CellKind::Basic) {
        fill(p.w_x);
        fill(p.w_s);
    } else {
        for (auto& g : p.gates) {
            fill(g.u);
            fill(g.v);
        }
        p.gates[kGateForget].c.setOnes();
    }
    fill(p.w_out);
    return p;
}

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Vector sigmoid(const Vector& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

/// Pre-activations and gate values of one LSTM step, kept for backprop and
/// Jacobians.
struct LstmStepTrace {
    Vector gi, gf, go, gc; // gate activations (gc = tanh candidate)
    Vector c_new, tanh_c_new, h_new;
};

inline LstmStepTrace lstm_step_trace(const NetworkParameters& p, const Vector& x,
                                     const Vector& h, const Vector& c) {
    LstmStepTrace t;
    const auto& gi = p.gates[kGateInput];
    const auto& gf = p.gates[kGateForget];
    const auto& go = p.gates[kGateOutput];
    const auto& gc = p.gates[kGateCandidate];
    t.gi = sigmoid(Vector(gi.u * x + gi.v * h + gi.c));
    t.gf = sigmoid(Vector(gf.u * x + gf.v * h + gf.c));
    t.go = sigmoid(Vector(go.u * x + go.v * h + go.c));
    t.gc = (gc.u * x + gc.v * h + gc.c).array().tanh();
    t.c_new = t.gf.cwiseProduct(c) + t.gi.cwiseProduct(t.gc);
    t.tanh_c_new = t.c_new.array().tanh();
    t.h_new = t.go.cwiseProduct(t.tanh_c_new);
    return t;
}

} // namespace detail

/// One application of the state map: s' = F(x, s).
inline InnerState cell_step(const NetworkParameters& p, const Vector& x,
                            const InnerState& s) {
    if (x.size() != p.d || s.h.size() != p.n)
        throw std::invalid_argument("cell_step: shape mismatch");
    InnerState out;
    if (p.cell == CellKind::Basic) {
        out.h = (p.w_x * x + p.w_s * s.h + p.b_s).array().tanh();
        return out;
    }
    if (s.c.size() != p.n) throw std::invalid_argument("cell_step: missing LSTM carry");
    const auto t = detail::lstm_step_trace(p, x, s.h, s.c);
    out.h = t.h_new;
    out.c = t.c_new;
    return out;
}

/// Linear readout of the exposed state: x_hat = W h + b.
inline Vector readout(const NetworkParameters& p, const InnerState& s) {
    if (s.h.size() != p.n) throw std::invalid_argument("readout: shape mismatch");
    return p.w_out * s.h + p.b_out;
}

struct ForwardResult {
    std::vector<InnerState> states; // one per input element
    Vector prediction;              // readout of the final state
};

/// Run the whole input through the cell from the zero state and read out the
/// final state.
inline ForwardResult forward(const NetworkParameters& p, std::span<const Vector> xs) {
    if (xs.empty()) throw std::invalid_argument("forward: empty input");
    ForwardResult r;
    r.states.reserve(xs.size());
    InnerState s = zero_state(p);
    for (const Vector& x : xs) {
        s = cell_step(p, x, s);
        r.states.push_back(s);
    }
    r.prediction = readout(p, s);
    return r;
}

/// d(next state)/dx at (x, s). Rows follow the flattened state convention:
/// n rows for Basic, 2n rows (h then c) for LSTM.
inline Matrix jacobian_x(const NetworkParameters& p, const Vector& x, const InnerState& s) {
    if (p.cell == CellKind::Basic) {
        const Vector a = (p.w_x * x + p.w_s * s.h + p.b_s).array().tanh();
        const Vector dtanh = 1.0 - a.array().square();
        return dtanh.asDiagonal() * p.w_x;
    }
    const auto t = detail::lstm_step_trace(p, x, s.h, s.c);
    const Vector di = t.gi.cwiseProduct(Vector(1.0 - t.gi.array()));
    const Vector df = t.gf.cwiseProduct(Vector(1.0 - t.gf.array()));
    const Vector dgo = t.go.cwiseProduct(Vector(1.0 - t.go.array()));
    const Vector dg = 1.0 - t.gc.array().square();
    const Vector dtc = 1.0 - t.tanh_c_new.array().square();

    const Matrix dc_dx = s.c.cwiseProduct(df).asDiagonal() * p.gates[kGateForget].u +
                         t.gc.cwiseProduct(di).asDiagonal() * p.gates[kGateInput].u +
                         t.gi.cwiseProduct(dg).asDiagonal() * p.gates[kGateCandidate].u;
    const Matrix dh_dx = t.tanh_c_new.cwiseProduct(dgo).asDiagonal() * p.gates[kGateOutput].u +
                         t.go.cwiseProduct(dtc).asDiagonal() * dc_dx;
    Matrix j(2 * p.n, p.d);
    j.topRows(p.n) = dh_dx;
    j.bottomRows(p.n) = dc_dx;
    return j;
}

/// d(next state)/d(state) at (x, s); n x n for Basic, 2n x 2n for LSTM with
/// the extended (h; c) ordering.
inline Matrix jacobian_s(const NetworkParameters& p, const Vector& x, const InnerState& s) {
    if (p.cell == CellKind::Basic) {
        const Vector a = (p.w_x * x + p.w_s * s.h + p.b_s).array().tanh();
        const Vector dtanh = 1.0 - a.array().square();
        return dtanh.asDiagonal() * p.w_s;
    }
    const auto t = detail::lstm_step_trace(p, x, s.h, s.c);
    const Vector di = t.gi.cwiseProduct(Vector(1.0 - t.gi.array()));
    const Vector df = t.gf.cwiseProduct(Vector(1.0 - t.gf.array()));
    const Vector dgo = t.go.cwiseProduct(Vector(1.0 - t.go.array()));
    const Vector dg = 1.0 - t.gc.array().square();
    const Vector dtc = 1.0 - t.tanh_c_new.array().square();

    const Matrix dc_dh = s.c.cwiseProduct(df).asDiagonal() * p.gates[kGateForget].v +
                         t.gc.cwiseProduct(di).asDiagonal() * p.gates[kGateInput].v +
                         t.gi.cwiseProduct(dg).asDiagonal() * p.gates[kGateCandidate].v;
    const Matrix dh_dh = t.tanh_c_new.cwiseProduct(dgo).asDiagonal() * p.gates[kGateOutput].v +
                         t.go.cwiseProduct(dtc).asDiagonal() * dc_dh;
    const Matrix dc_dc = Matrix(t.gf.asDiagonal());
    const Matrix dh_dc = Matrix(t.go.cwiseProduct(dtc).cwiseProduct(t.gf).asDiagonal());

    Matrix j(2 * p.n, 2 * p.n);
    j.topLeftCorner(p.n, p.n) = dh_dh;
    j.topRightCorner(p.n, p.n) = dh_dc;
    j.bottomLeftCorner(p.n, p.n) = dc_dh;
    j.bottomRightCorner(p.n, p.n) = dc_dc;
    return j;
}

} // namespace prn
