#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "prn/linalg.hpp"
#include "prn/rng.hpp"

namespace prn {

enum class CurveKind { Sine, Triangle, Parabola };

inline std::string to_string(CurveKind k) {
    switch (k) {
        case CurveKind::Sine: return "sine";
        case CurveKind::Triangle: return "triangle";
        case CurveKind::Parabola: return "parabola";
    }
    throw std::logic_error("bad CurveKind");
}

inline CurveKind curve_kind_from_string(const std::string& s) {
    if (s == "sine") return CurveKind::Sine;
    if (s == "triangle") return CurveKind::Triangle;
    if (s == "parabola") return CurveKind::Parabola;
    throw std::invalid_argument("unknown curve kind: " + s);
}

/// Parametric smooth curve. Sine and Triangle are 1D periodic waves;
/// Parabola is the 2D finite arc {b(t-1/2), 4h t(1-t)} on t in [0,1].
struct TrajectorySpec {
    CurveKind kind = CurveKind::Sine;
    double h = 1.0; // Parabola vertex height
    double b = 1.0; // Parabola range

    int dim() const { return kind == CurveKind::Parabola ? 2 : 1; }

    void validate() const {
        if (kind == CurveKind::Parabola && (h <= 0.0 || b <= 0.0))
            throw std::invalid_argument("parabola requires h > 0 and b > 0");
    }

    std::string describe() const {
        if (kind == CurveKind::Parabola)
            return "parabola h=" + std::to_string(h) + " b=" + std::to_string(b);
        return to_string(kind);
    }
};

enum class NoiseDistribution { UniformSymmetric, Gaussian };

inline std::string to_string(NoiseDistribution d) {
    return d == NoiseDistribution::UniformSymmetric ? "uniform" : "gaussian";
}

inline NoiseDistribution noise_distribution_from_string(const std::string& s) {
    if (s == "uniform") return NoiseDistribution::UniformSymmetric;
    if (s == "gaussian") return NoiseDistribution::Gaussian;
    throw std::invalid_argument("unknown noise distribution: " + s);
}

/// Zero-mean white noise xi with amplitude a: samples are a * scale .* xi_j.
/// UniformSymmetric draws xi components on [-1, 1] (so `amplitude` is a
/// literal per-component bound); Gaussian draws standard normals.
struct NoiseModel {
    double amplitude = 0.0;
    NoiseDistribution distribution = NoiseDistribution::UniformSymmetric;
    std::vector<double> per_component_scale; // empty = all ones
    std::uint64_t seed = 0;

    double scale_for(int component) const {
        if (per_component_scale.empty()) return 1.0;
        return per_component_scale.at(static_cast<std::size_t>(component));
    }

    /// Default per-component scale for the 2D parabola: (0.1, 1.0).
    static NoiseModel parabola_default(double amplitude, std::uint64_t seed) {
        NoiseModel nm;
        nm.amplitude = amplitude;
        nm.per_component_scale = {0.1, 1.0};
        nm.seed = seed;
        return nm;
    }
};

/// Sampled trajectory: noisy points g_j alongside the retained truth f_j.
struct NoisySequence {
    double t0 = 0.0;
    double dt = 0.01;
    std::vector<Vector> points; // g_j = f_j + a * scale .* xi_j
    std::vector<Vector> truth;  // f_j
    double amplitude_used = 0.0;

    int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
    std::size_t size() const { return points.size(); }
};

/// One seq-to-one example: input window plus the single next point.
/// Provenance indices (source sequence, start offset) are retained for
/// adjacency checks and validation-isolation assertions.
struct Segment {
    std::vector<Vector> input;
    Vector target;
    int source_index = -1;
    int start = -1;

    int length() const { return static_cast<int>(input.size()); }
};

struct TrainingCorpus {
    std::vector<Segment> segments;
    int min_len = 1;
    int max_len = 1;
    std::vector<std::string> source_descriptions;

    int dim() const {
        return segments.empty() ? 0 : static_cast<int>(segments.front().target.size());
    }
};

/// f(t) per curve family. Parabola is only defined on 0 <= t <= 1.
inline Vector eval_smooth(const TrajectorySpec& spec, double t) {
    spec.validate();
    constexpr double two_pi = 6.283185307179586476925286766559;
    switch (spec.kind) {
        case CurveKind::Sine: {
            Vector v(1);
            v(0) = std::sin(two_pi * t);
            return v;
        }
        case CurveKind::Triangle: {
            Vector v(1);
            v(0) = 0.5 + std::asin(std::sin(two_pi * t)) / 3.14159265358979323846;
            return v;
        }
        case CurveKind::Parabola: {
            if (t < 0.0 || t > 1.0)
                throw std::domain_error("parabola is finite: t must be in [0,1]");
            Vector v(2);
            v(0) = spec.b * (t - 0.5);
            v(1) = 4.0 * spec.h * t * (1.0 - t);
            return v;
        }
    }
    throw std::logic_error("bad CurveKind");
}

/// Sample n points g_j = f(t0 + j*dt) + a * scale .* xi_j, deterministic in
/// the noise seed. a = 0 yields points == truth exactly.
inline NoisySequence sample(const TrajectorySpec& spec, double t0, double dt,
                            int n, const NoiseModel& noise) {
    if (dt <= 0.0) throw std::invalid_argument("sample: dt must be positive");
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    if (noise.amplitude < 0.0)
        throw std::invalid_argument("sample: noise amplitude must be >= 0");

    NoisySequence seq;
    seq.t0 = t0;
    seq.dt = dt;
    seq.amplitude_used = noise.amplitude;
    seq.points.reserve(static_cast<std::size_t>(n));
    seq.truth.reserve(static_cast<std::size_t>(n));

    Rng rng(noise.seed);
    const int d = spec.dim();
    for (int j = 0; j < n; ++j) {
        Vector f = eval_smooth(spec, t0 + j * dt);
        seq.truth.push_back(f);
        if (noise.amplitude == 0.0) {
            seq.points.push_back(f);
            continue;
        }
        Vector g = f;
        for (int k = 0; k < d; ++k) {
            const double xi = noise.distribution == NoiseDistribution::UniformSymmetric
                                  ? rng.uniform_sym()
                                  : rng.gaussian();
            g(k) += noise.amplitude * noise.scale_for(k) * xi;
        }
        seq.points.push_back(g);
    }
    return seq;
}

/// Draw `count` (start, length) segments from the given sequences: sequence
/// uniform, length uniform on [min_len, max_len], start uniform over the
/// placements whose target index still exists. Inputs and targets come from
/// the noisy points.
inline TrainingCorpus build_training_corpus(const std::vector<NoisySequence>& sequences,
                                            int min_len, int max_len, int count,
                                            std::uint64_t seed) {
    if (sequences.empty())
        throw std::invalid_argument("build_training_corpus: no source sequences");
    if (min_len < 1 || max_len < min_len)
        throw std::invalid_argument("build_training_corpus: bad length bounds");
    if (count < 1)
        throw std::invalid_argument("build_training_corpus: count must be >= 1");
    for (const auto& s : sequences) {
        if (s.size() < static_cast<std::size_t>(max_len) + 1)
            throw std::length_error(
                "build_training_corpus: source sequence shorter than max_len+1");
    }

    TrainingCorpus corpus;
    corpus.min_len = min_len;
    corpus.max_len = max_len;
    corpus.segments.reserve(static_cast<std::size_t>(count));

    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
        const auto si = static_cast<int>(rng.below(sequences.size()));
        const auto& seq = sequences[static_cast<std::size_t>(si)];
        const int m = min_len + static_cast<int>(rng.below(
                          static_cast<std::uint64_t>(max_len - min_len + 1)));
        // target index start+m must exist, so start <= size-1-m
        const auto starts = static_cast<std::uint64_t>(seq.size()) -
                            static_cast<std::uint64_t>(m);
        const int start = static_cast<int>(rng.below(starts));

        Segment seg;
        seg.source_index = si;
        seg.start = start;
        seg.input.assign(seq.points.begin() + start, seq.points.begin() + start + m);
        seg.target = seq.points[static_cast<std::size_t>(start + m)];
        corpus.segments.push_back(std::move(seg));
    }
    return corpus;
}

} // namespace prn
