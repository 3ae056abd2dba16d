#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "prn/predict.hpp"
#include "prn/trajectory.hpp"
#include "prn/training.hpp"

namespace prn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything an experiment preset needs: trajectories, noise levels,
/// corpus recipe, network, training recipe, prediction run and scatter demo
/// settings. Loaded from versioned JSON; unknown keys are rejected so preset
/// files cannot drift silently.
struct ExperimentConfig {
    int version = 1;
    std::string name = "experiment";
    std::uint64_t seed = 1;

    std::vector<TrajectorySpec> trajectories;

    NoiseDistribution distribution = NoiseDistribution::UniformSymmetric;
    double train_amplitude = 0.15;          // a_0
    std::vector<double> input_amplitudes;   // a_i values for prediction runs

    int segments_per_trajectory = 6000;
    int min_len = 5;
    int max_len = 50;
    double dt = 0.01;
    int periods = 500;      // periodic curves: generated sequence length
    int realizations = 100; // finite curves: independent noisy copies

    CellKind cell = CellKind::LSTM;
    int neurons = 20;

    TrainConfig train;

    Algorithm algorithm = Algorithm::MW;
    int predict_m = 50;
    int predict_p = 200;
    std::optional<int> window_cap;
    double predict_t_start = 0.0;

    int scatter_trials = 8;
    std::vector<int> scatter_m_values = {50};
    double scatter_t_start = 0.25;

    int dim() const { return trajectories.empty() ? 1 : trajectories.front().dim(); }

    void validate() const {
        if (trajectories.empty()) throw ConfigError("config: no trajectories");
        const int d = trajectories.front().dim();
        for (const auto& t : trajectories) {
            t.validate();
            if (t.dim() != d)
                throw ConfigError("config: trajectories must share one dimension");
        }
        if (train_amplitude < 0.0) throw ConfigError("config: train_amplitude must be >= 0");
        for (double a : input_amplitudes)
            if (a < 0.0) throw ConfigError("config: input amplitudes must be >= 0");
        if (min_len < 1 || max_len < min_len) throw ConfigError("config: bad length bounds");
        if (dt <= 0.0) throw ConfigError("config: dt must be > 0");
        if (segments_per_trajectory < 1) throw ConfigError("config: bad segment count");
        if (neurons < 1) throw ConfigError("config: neurons must be >= 1");
        if (predict_m < 1 || predict_p < 1) throw ConfigError("config: bad prediction shape");
        // finite trajectories must fit the prediction run
        for (const auto& t : trajectories) {
            if (t.kind == CurveKind::Parabola) {
                const double t_end = predict_t_start +
                                     (predict_m + predict_p) * dt;
                if (predict_t_start < 0.0 || t_end > 1.0 + 1e-12)
                    throw ConfigError("config: prediction run leaves the parabola domain");
            }
        }
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& where,
                                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.contains(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using nlohmann::json;
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    detail::reject_unknown_keys(j, "top level",
                                {"version", "name", "seed", "trajectories", "noise",
                                 "corpus", "network", "train", "predict", "scatter"});
    ExperimentConfig cfg;
    cfg.version = j.value("version", 1);
    if (cfg.version != 1) throw ConfigError("config: unsupported version");
    cfg.name = j.value("name", std::string("experiment"));
    cfg.seed = j.value("seed", std::uint64_t{1});

    if (!j.contains("trajectories")) throw ConfigError("config: missing 'trajectories'");
    for (const auto& t : j.at("trajectories")) {
        detail::reject_unknown_keys(t, "trajectories[]", {"kind", "h", "b"});
        TrajectorySpec spec;
        spec.kind = curve_kind_from_string(t.at("kind").get<std::string>());
        if (spec.kind == CurveKind::Parabola) {
            spec.h = t.value("h", 1.0);
            spec.b = t.value("b", 1.0);
        } else if (t.contains("h") || t.contains("b")) {
            throw ConfigError("config: h/b only apply to parabola");
        }
        cfg.trajectories.push_back(spec);
    }

    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        detail::reject_unknown_keys(n, "noise",
                                    {"distribution", "train_amplitude", "input_amplitudes"});
        if (n.contains("distribution"))
            cfg.distribution =
                noise_distribution_from_string(n.at("distribution").get<std::string>());
        cfg.train_amplitude = n.value("train_amplitude", 0.15);
        if (n.contains("input_amplitudes"))
            cfg.input_amplitudes = n.at("input_amplitudes").get<std::vector<double>>();
    }
    if (cfg.input_amplitudes.empty()) cfg.input_amplitudes = {cfg.train_amplitude};

    if (j.contains("corpus")) {
        const auto& c = j.at("corpus");
        detail::reject_unknown_keys(c, "corpus",
                                    {"segments_per_trajectory", "min_len", "max_len", "dt",
                                     "periods", "realizations"});
        cfg.segments_per_trajectory = c.value("segments_per_trajectory", 6000);
        cfg.min_len = c.value("min_len", 5);
        cfg.max_len = c.value("max_len", 50);
        cfg.dt = c.value("dt", 0.01);
        cfg.periods = c.value("periods", 500);
        cfg.realizations = c.value("realizations", 100);
    }

    if (j.contains("network")) {
        const auto& n = j.at("network");
        detail::reject_unknown_keys(n, "network", {"cell", "n"});
        if (n.contains("cell")) cfg.cell = cell_kind_from_string(n.at("cell").get<std::string>());
        cfg.neurons = n.value("n", 20);
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        detail::reject_unknown_keys(t, "train",
                                    {"epochs", "batch_size", "learning_rate", "beta1", "beta2",
                                     "epsilon", "validation_fraction", "clip_norm"});
        cfg.train.epochs = t.value("epochs", 50);
        cfg.train.batch_size = t.value("batch_size", 32);
        cfg.train.learning_rate = t.value("learning_rate", 1e-3);
        cfg.train.beta1 = t.value("beta1", 0.9);
        cfg.train.beta2 = t.value("beta2", 0.999);
        cfg.train.epsilon = t.value("epsilon", 1e-8);
        cfg.train.validation_fraction = t.value("validation_fraction", 0.2);
        cfg.train.clip_norm = t.value("clip_norm", 5.0);
    }

    if (j.contains("predict")) {
        const auto& p = j.at("predict");
        detail::reject_unknown_keys(p, "predict", {"algorithm", "m", "p", "cap", "t_start"});
        if (p.contains("algorithm"))
            cfg.algorithm = algorithm_from_string(p.at("algorithm").get<std::string>());
        cfg.predict_m = p.value("m", 50);
        cfg.predict_p = p.value("p", 200);
        if (p.contains("cap")) cfg.window_cap = p.at("cap").get<int>();
        cfg.predict_t_start = p.value("t_start", 0.0);
    }

    if (j.contains("scatter")) {
        const auto& s = j.at("scatter");
        detail::reject_unknown_keys(s, "scatter", {"trials", "m_values", "t_start"});
        cfg.scatter_trials = s.value("trials", 8);
        if (s.contains("m_values"))
            cfg.scatter_m_values = s.at("m_values").get<std::vector<int>>();
        cfg.scatter_t_start = s.value("t_start", 0.25);
    }

    cfg.validate();
    return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["version"] = cfg.version;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    j["trajectories"] = nlohmann::json::array();
    for (const auto& t : cfg.trajectories) {
        nlohmann::json tj;
        tj["kind"] = to_string(t.kind);
        if (t.kind == CurveKind::Parabola) {
            tj["h"] = t.h;
            tj["b"] = t.b;
        }
        j["trajectories"].push_back(tj);
    }
    j["noise"] = {{"distribution", to_string(cfg.distribution)},
                  {"train_amplitude", cfg.train_amplitude},
                  {"input_amplitudes", cfg.input_amplitudes}};
    j["corpus"] = {{"segments_per_trajectory", cfg.segments_per_trajectory},
                   {"min_len", cfg.min_len},
                   {"max_len", cfg.max_len},
                   {"dt", cfg.dt},
                   {"periods", cfg.periods},
                   {"realizations", cfg.realizations}};
    j["network"] = {{"cell", to_string(cfg.cell)}, {"n", cfg.neurons}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"beta1", cfg.train.beta1},
                  {"beta2", cfg.train.beta2},
                  {"epsilon", cfg.train.epsilon},
                  {"validation_fraction", cfg.train.validation_fraction},
                  {"clip_norm", cfg.train.clip_norm}};
    j["predict"] = {{"algorithm", to_string(cfg.algorithm)},
                    {"m", cfg.predict_m},
                    {"p", cfg.predict_p},
                    {"t_start", cfg.predict_t_start}};
    if (cfg.window_cap) j["predict"]["cap"] = *cfg.window_cap;
    j["scatter"] = {{"trials", cfg.scatter_trials},
                    {"m_values", cfg.scatter_m_values},
                    {"t_start", cfg.scatter_t_start}};
    return j;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

} // namespace prn
