#pragma once

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "prn/analysis.hpp"
#include "prn/config.hpp"
#include "prn/io.hpp"
#include "prn/svg.hpp"

namespace prn {

// Seed stream map for one experiment run (all derived from the master seed):
//   100 + i        training-noise sequence of trajectory i (periodic)
//   100 + i*1000+r realization r of finite trajectory i
//   200 + i        corpus draw of trajectory i
//   300            parameter initialization
//   301            training shuffle/split
//   400 + runs     prediction input sequences (counter per run)
//   500 + streams  analysis noise draws / scatter trials
struct ExperimentContext {
    ExperimentConfig config;
    std::string out_dir = ".";
    bool emit_svg = false;

    std::string path(const std::string& file) const {
        return (std::filesystem::path(out_dir) / file).string();
    }
};

namespace detail {

inline std::string amp_tag(double a) {
    std::string s = io::fmt(a);
    for (auto& c : s)
        if (c == '.') c = 'p';
    return s;
}

inline std::string traj_tag(const TrajectorySpec& t, int index) {
    if (t.kind == CurveKind::Parabola)
        return "parabola_b" + amp_tag(t.b);
    (void)index;
    return to_string(t.kind);
}

inline std::vector<NoisySequence> training_sequences(const ExperimentContext& ctx,
                                                     int traj_index) {
    const auto& cfg = ctx.config;
    const auto& spec = cfg.trajectories[static_cast<std::size_t>(traj_index)];
    std::vector<NoisySequence> seqs;
    if (spec.kind == CurveKind::Parabola) {
        const int n = static_cast<int>(std::floor(1.0 / cfg.dt)) + 1;
        for (int r = 0; r < cfg.realizations; ++r) {
            NoiseModel nm = NoiseModel::parabola_default(
                cfg.train_amplitude,
                derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(traj_index) * 1000 +
                                          static_cast<std::uint64_t>(r)));
            nm.distribution = cfg.distribution;
            seqs.push_back(sample(spec, 0.0, cfg.dt, n, nm));
        }
    } else {
        const int points_per_period = static_cast<int>(std::lround(1.0 / cfg.dt));
        const int n = cfg.periods * points_per_period + 1;
        NoiseModel nm;
        nm.amplitude = cfg.train_amplitude;
        nm.distribution = cfg.distribution;
        nm.seed = derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(traj_index));
        seqs.push_back(sample(spec, 0.0, cfg.dt, n, nm));
    }
    return seqs;
}

inline NoiseModel input_noise(const ExperimentConfig& cfg, double amplitude,
                              std::uint64_t stream) {
    NoiseModel nm;
    nm.amplitude = amplitude;
    nm.distribution = cfg.distribution;
    if (cfg.dim() == 2) nm.per_component_scale = {0.1, 1.0};
    nm.seed = derive_seed(cfg.seed, stream);
    return nm;
}

} // namespace detail

/// Generate training sequences and the merged corpus; write the sequence
/// CSVs (first realization per trajectory) and the corpus file.
inline TrainingCorpus cmd_gen(const ExperimentContext& ctx, bool quiet = false) {
    const auto& cfg = ctx.config;
    std::filesystem::create_directories(ctx.out_dir);

    TrainingCorpus merged;
    merged.min_len = cfg.min_len;
    merged.max_len = cfg.max_len;
    for (std::size_t i = 0; i < cfg.trajectories.size(); ++i) {
        const auto seqs = detail::training_sequences(ctx, static_cast<int>(i));
        const auto tag = detail::traj_tag(cfg.trajectories[i], static_cast<int>(i));
        {
            auto f = io::open_out(ctx.path("seq_" + tag + ".csv"));
            write_sequence_csv(f, seqs.front());
        }
        TrainingCorpus part = build_training_corpus(
            seqs, cfg.min_len, cfg.max_len, cfg.segments_per_trajectory,
            derive_seed(cfg.seed, 200 + i));
        merged.source_descriptions.push_back(cfg.trajectories[i].describe());
        for (auto& seg : part.segments) merged.segments.push_back(std::move(seg));
    }
    {
        auto f = io::open_out(ctx.path("corpus.txt"));
        write_corpus(f, merged);
    }
    if (!quiet)
        std::cout << "gen: wrote corpus.txt with " << merged.segments.size()
                  << " segments\n";
    return merged;
}

/// Train on the generated corpus (generating it first if corpus.txt is
/// absent); write checkpoint.txt and train_log.csv. epochs_override = 0
/// turns a resumed run into a pure load/save no-op.
inline TrainHistory cmd_train(const ExperimentContext& ctx,
                              const std::string& resume_checkpoint = "",
                              std::optional<int> epochs_override = std::nullopt,
                              bool quiet = false) {
    const auto& cfg = ctx.config;
    std::filesystem::create_directories(ctx.out_dir);

    TrainingCorpus corpus;
    const auto corpus_path = ctx.path("corpus.txt");
    if (std::filesystem::exists(corpus_path)) {
        auto f = io::open_in(corpus_path);
        corpus = read_corpus(f);
    } else {
        corpus = cmd_gen(ctx, quiet);
    }

    NetworkParameters params;
    if (!resume_checkpoint.empty()) {
        auto f = io::open_in(resume_checkpoint);
        params = load_checkpoint(f);
        if (params.d != corpus.dim())
            throw ConfigError("train: checkpoint dimension does not match corpus");
    } else {
        params = init_params(cfg.cell, cfg.neurons, corpus.dim(), derive_seed(cfg.seed, 300));
    }

    TrainConfig tc = cfg.train;
    tc.shuffle_seed = derive_seed(cfg.seed, 301);
    if (epochs_override) tc.epochs = *epochs_override;

    TrainHistory history;
    if (tc.epochs == 0) {
        history.final_params = params; // no-op resume
    } else {
        history = train(params, corpus, tc);
        auto log = io::open_out(ctx.path("train_log.csv"));
        write_training_log_csv(log, history);
    }
    {
        std::ostringstream meta;
        meta << "preset=" << cfg.name << " a0=" << io::fmt(cfg.train_amplitude)
             << " seed=" << cfg.seed << " epochs=" << tc.epochs;
        auto f = io::open_out(ctx.path("checkpoint.txt"));
        save_checkpoint(f, history.final_params, meta.str());
    }
    if (!quiet && !history.epochs.empty())
        std::cout << "train: final E_tr=" << io::fmt(history.epochs.back().train_error)
                  << " val=" << io::fmt(history.epochs.back().validation_error) << "\n";
    return history;
}

struct PredictionOutcome {
    TrajectorySpec spec;
    double input_amplitude = 0.0;
    PredictionRun run;
    SmoothnessReport smoothness;
};

/// One prediction run per (trajectory, input amplitude): build a fresh noisy
/// input, roll out, write the prediction CSV (plus SVG on request) and
/// report the smoothness ratio.
inline std::vector<PredictionOutcome> cmd_predict(const ExperimentContext& ctx,
                                                  const std::string& checkpoint_path = "",
                                                  bool quiet = false) {
    const auto& cfg = ctx.config;
    std::filesystem::create_directories(ctx.out_dir);
    const auto ckpt = checkpoint_path.empty() ? ctx.path("checkpoint.txt") : checkpoint_path;
    NetworkParameters params;
    {
        auto f = io::open_in(ckpt);
        params = load_checkpoint(f);
    }
    if (params.d != cfg.dim())
        throw ConfigError("predict: checkpoint dimension does not match config trajectories");

    std::vector<PredictionOutcome> outcomes;
    std::uint64_t stream = 400;
    for (std::size_t i = 0; i < cfg.trajectories.size(); ++i) {
        const auto& spec = cfg.trajectories[i];
        for (double ai : cfg.input_amplitudes) {
            const NoiseModel nm = detail::input_noise(cfg, ai, stream++);
            const NoisySequence seq =
                sample(spec, cfg.predict_t_start, cfg.dt, cfg.predict_m + cfg.predict_p, nm);
            const std::span<const Vector> all_points(seq.points);
            const std::span<const Vector> all_truth(seq.truth);
            const auto input = all_points.first(static_cast<std::size_t>(cfg.predict_m));
            const auto truth_cont = all_truth.subspan(static_cast<std::size_t>(cfg.predict_m));
            const auto noisy_cont = all_points.subspan(static_cast<std::size_t>(cfg.predict_m));

            PredictionOutcome out;
            out.spec = spec;
            out.input_amplitude = ai;
            switch (cfg.algorithm) {
                case Algorithm::MW: out.run = predict_mw(params, input, cfg.predict_p); break;
                case Algorithm::EW:
                    out.run = predict_ew(params, input, cfg.predict_p,
                                         cfg.window_cap ? cfg.window_cap
                                                        : std::optional<int>(cfg.max_len));
                    break;
                case Algorithm::ML: out.run = predict_ml(params, input, cfg.predict_p); break;
            }
            out.smoothness = smoothness(out.run, truth_cont, ai > 0.0 ? noisy_cont
                                                                      : std::span<const Vector>{});

            const auto tag = detail::traj_tag(spec, static_cast<int>(i)) + "_" +
                             to_string(cfg.algorithm) + "_ai" + detail::amp_tag(ai);
            {
                auto f = io::open_out(ctx.path("pred_" + tag + ".csv"));
                // record only the filename: embedding the directory would make
                // otherwise-identical runs differ byte-wise
                write_prediction_csv(f, out.run, truth_cont,
                                     std::filesystem::path(ckpt).filename().string());
            }
            if (ctx.emit_svg) {
                SvgPlot plot;
                const int d = spec.dim();
                auto series = [&](std::span<const Vector> pts, int offset) {
                    std::vector<double> xs, ys;
                    for (std::size_t j = 0; j < pts.size(); ++j) {
                        if (d == 1) {
                            xs.push_back(cfg.predict_t_start +
                                         (offset + static_cast<int>(j)) * cfg.dt);
                            ys.push_back(pts[j](0));
                        } else {
                            xs.push_back(pts[j](0));
                            ys.push_back(pts[j](1));
                        }
                    }
                    return std::pair{xs, ys};
                };
                auto [ixs, iys] = series(input, 0);
                auto [cxs, cys] = series(noisy_cont, cfg.predict_m);
                auto [txs, tys] = series(truth_cont, cfg.predict_m);
                auto [pxs, pys] = series(out.run.predictions, cfg.predict_m);
                plot.add_line("input", "green", ixs, iys);
                plot.add_line("continuation", "red", cxs, cys);
                plot.add_line("truth", "black", txs, tys, true);
                plot.add_line("prediction", "blue", pxs, pys);
                auto f = io::open_out(ctx.path("pred_" + tag + ".svg"));
                plot.write(f);
            }
            if (!quiet)
                std::cout << "predict " << tag
                          << ": rmse=" << io::fmt(out.smoothness.rmse_pred_vs_truth)
                          << " smoothness_ratio=" << io::fmt(out.smoothness.smoothness_ratio)
                          << "\n";
            outcomes.push_back(std::move(out));
        }
    }
    return outcomes;
}

/// Noise-propagation, residual-scaling and scatter reports for the first
/// configured trajectory.
inline void cmd_analyze(const ExperimentContext& ctx, const std::string& checkpoint_path = "",
                        bool scatter_only = false, bool quiet = false) {
    const auto& cfg = ctx.config;
    std::filesystem::create_directories(ctx.out_dir);
    const auto ckpt = checkpoint_path.empty() ? ctx.path("checkpoint.txt") : checkpoint_path;
    NetworkParameters params;
    {
        auto f = io::open_in(ckpt);
        params = load_checkpoint(f);
    }
    if (params.d != cfg.dim())
        throw ConfigError("analyze: checkpoint dimension does not match config trajectories");

    const auto& spec = cfg.trajectories.front();

    if (!scatter_only) {
        // truth segment and one fixed noise draw
        const int len = cfg.predict_m;
        std::vector<Vector> truth;
        for (int j = 0; j < len; ++j)
            truth.push_back(eval_smooth(spec, cfg.predict_t_start + j * cfg.dt));
        Rng rng(derive_seed(cfg.seed, 500));
        std::vector<Vector> xi;
        for (int j = 0; j < len; ++j) {
            Vector v(spec.dim());
            for (int k = 0; k < spec.dim(); ++k) {
                const double raw = cfg.distribution == NoiseDistribution::UniformSymmetric
                                       ? rng.uniform_sym()
                                       : rng.gaussian();
                const double scale = (spec.dim() == 2 && k == 0) ? 0.1 : 1.0;
                v(k) = scale * raw;
            }
            xi.push_back(v);
        }

        const NoiseReport rep =
            noise_propagation(params, truth, xi, cfg.train_amplitude);
        {
            auto f = io::open_out(ctx.path("noise_report.csv"));
            write_noise_report_csv(f, rep);
        }
        {
            auto f = io::open_out(ctx.path("residual_scaling.csv"));
            f << "a,max_residual,ratio_to_previous\n";
            double prev = 0.0;
            for (double a : {0.2, 0.1, 0.05, 0.025}) {
                const NoiseReport r = noise_propagation(params, truth, xi, a);
                const double mr =
                    *std::max_element(r.residuals.begin(), r.residuals.end());
                f << io::fmt(a) << "," << io::fmt(mr) << ","
                  << (prev > 0.0 ? io::fmt(prev / mr) : std::string("")) << "\n";
                prev = mr;
            }
        }
        if (!quiet) std::cout << "analyze: wrote noise_report.csv, residual_scaling.csv\n";
    }

    int stream = 0;
    for (int m : cfg.scatter_m_values) {
        const ScatterResult res = prediction_scatter(
            params, spec, cfg.scatter_t_start, cfg.dt, m, cfg.train_amplitude,
            cfg.scatter_trials, derive_seed(cfg.seed, 520 + static_cast<std::uint64_t>(stream++)),
            cfg.distribution);
        const std::string name = "scatter_m" + std::to_string(m);
        {
            auto f = io::open_out(ctx.path(name + ".csv"));
            write_scatter_csv(f, res);
        }
        if (ctx.emit_svg) {
            SvgPlot plot;
            const int d = spec.dim();
            std::vector<double> xs, ys;
            for (const auto& p : res.predictions) {
                xs.push_back(d == 1 ? cfg.scatter_t_start + m * cfg.dt : p(0));
                ys.push_back(d == 1 ? p(0) : p(1));
            }
            plot.add_points("predictions", "gray", xs, ys);
            plot.add_points("mean", "black",
                            {d == 1 ? cfg.scatter_t_start + m * cfg.dt : res.mean(0)},
                            {d == 1 ? res.mean(0) : res.mean(1)});
            plot.add_points("truth", "red",
                            {d == 1 ? cfg.scatter_t_start + m * cfg.dt : res.truth_target(0)},
                            {d == 1 ? res.truth_target(0) : res.truth_target(1)});
            auto f = io::open_out(ctx.path(name + ".svg"));
            plot.write(f);
        }
        if (!quiet)
            std::cout << "analyze " << name << ": |mean-truth|="
                      << io::fmt((res.mean - res.truth_target).norm()) << "\n";
    }
}

} // namespace prn
