#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "prn/analysis.hpp"
#include "prn/predict.hpp"
#include "prn/rnn.hpp"
#include "prn/trajectory.hpp"
#include "prn/training.hpp"

namespace prn {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io {

/// Shortest decimal form that round-trips a double exactly.
inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) throw FormatError("bad number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

} // namespace io

// ---------------------------------------------------------------------------
// Sequence CSV: header `t, g_1[, g_2], f_1[, f_2]`, one row per sample.
// ---------------------------------------------------------------------------

inline void write_sequence_csv(std::ostream& os, const NoisySequence& seq) {
    const int d = seq.dim();
    os << "t";
    for (int k = 0; k < d; ++k) os << ",g_" << (k + 1);
    for (int k = 0; k < d; ++k) os << ",f_" << (k + 1);
    os << "\n";
    for (std::size_t j = 0; j < seq.size(); ++j) {
        os << io::fmt(seq.t0 + static_cast<double>(j) * seq.dt);
        for (int k = 0; k < d; ++k) os << "," << io::fmt(seq.points[j](k));
        for (int k = 0; k < d; ++k) os << "," << io::fmt(seq.truth[j](k));
        os << "\n";
    }
}

inline NoisySequence read_sequence_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("sequence csv: empty file");
    const auto header = io::split(line, ',');
    if (header.size() != 3 && header.size() != 5)
        throw FormatError("sequence csv: unexpected column count");
    const int d = (static_cast<int>(header.size()) - 1) / 2;

    NoisySequence seq;
    std::vector<double> times;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = io::split(line, ',');
        if (static_cast<int>(cells.size()) != 1 + 2 * d)
            throw FormatError("sequence csv: bad row");
        times.push_back(io::parse_double(cells[0]));
        Vector g(d), f(d);
        for (int k = 0; k < d; ++k) g(k) = io::parse_double(cells[static_cast<std::size_t>(1 + k)]);
        for (int k = 0; k < d; ++k) f(k) = io::parse_double(cells[static_cast<std::size_t>(1 + d + k)]);
        seq.points.push_back(g);
        seq.truth.push_back(f);
    }
    if (times.empty()) throw FormatError("sequence csv: no rows");
    seq.t0 = times.front();
    seq.dt = times.size() > 1 ? times[1] - times[0] : 0.01;
    return seq;
}

// ---------------------------------------------------------------------------
// Corpus file: versioned text. Header records, then one `seg` line per
// segment carrying length, dimension, input values row-major and the target.
// ---------------------------------------------------------------------------

inline void write_corpus(std::ostream& os, const TrainingCorpus& corpus) {
    os << "prn-corpus 1\n";
    os << "min_len " << corpus.min_len << "\n";
    os << "max_len " << corpus.max_len << "\n";
    os << "count " << corpus.segments.size() << "\n";
    os << "sources " << corpus.source_descriptions.size() << "\n";
    for (const auto& s : corpus.source_descriptions) os << "source " << s << "\n";
    for (const Segment& seg : corpus.segments) {
        const int d = static_cast<int>(seg.target.size());
        os << "seg " << seg.length() << " " << d;
        for (const Vector& x : seg.input)
            for (int k = 0; k < d; ++k) os << " " << io::fmt(x(k));
        for (int k = 0; k < d; ++k) os << " " << io::fmt(seg.target(k));
        os << "\n";
    }
}

inline TrainingCorpus read_corpus(std::istream& is) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (tag != "prn-corpus" || version != 1)
        throw FormatError("corpus: bad magic or unsupported version");
    TrainingCorpus corpus;
    std::size_t count = 0, sources = 0;
    auto expect = [&](const std::string& want) {
        std::string got;
        is >> got;
        if (got != want) throw FormatError("corpus: expected '" + want + "', got '" + got + "'");
    };
    expect("min_len");
    is >> corpus.min_len;
    expect("max_len");
    is >> corpus.max_len;
    expect("count");
    is >> count;
    expect("sources");
    is >> sources;
    is.ignore();
    for (std::size_t i = 0; i < sources; ++i) {
        std::string line;
        std::getline(is, line);
        if (line.rfind("source ", 0) != 0) throw FormatError("corpus: bad source record");
        corpus.source_descriptions.push_back(line.substr(7));
    }
    corpus.segments.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        expect("seg");
        int m = 0, d = 0;
        is >> m >> d;
        if (m < 1 || (d != 1 && d != 2)) throw FormatError("corpus: bad segment header");
        Segment seg;
        seg.input.resize(static_cast<std::size_t>(m));
        for (auto& x : seg.input) {
            x.resize(d);
            for (int k = 0; k < d; ++k) is >> x(k);
        }
        seg.target.resize(d);
        for (int k = 0; k < d; ++k) is >> seg.target(k);
        if (!is) throw FormatError("corpus: truncated segment data");
        corpus.segments.push_back(std::move(seg));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Checkpoint: versioned text with named arrays. save/load round-trips the
// parameters bit for bit.
// ---------------------------------------------------------------------------

inline void save_checkpoint(std::ostream& os, const NetworkParameters& p,
                            const std::string& metadata = "") {
    os << "prn-checkpoint 1\n";
    os << "cell " << to_string(p.cell) << "\n";
    os << "n " << p.n << "\n";
    os << "d " << p.d << "\n";
    os << "meta " << metadata << "\n";
    auto array = [&](const std::string& name, const Matrix& m) {
        os << "array " << name << " " << m.rows() << " " << m.cols();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) os << " " << io::fmt(m(r, c));
        os << "\n";
    };
    auto varray = [&](const std::string& name, const Vector& v) {
        os << "array " << name << " " << v.size() << " 1";
        for (Eigen::Index i = 0; i < v.size(); ++i) os << " " << io::fmt(v(i));
        os << "\n";
    };
    if (p.cell == CellKind::Basic) {
        array("w_x", p.w_x);
        array("w_s", p.w_s);
        varray("b_s", p.b_s);
    } else {
        static const char* gate_names[4] = {"input", "forget", "output", "candidate"};
        for (int g = 0; g < 4; ++g) {
            const auto& blk = p.gates[static_cast<std::size_t>(g)];
            array(std::string(gate_names[g]) + "_u", blk.u);
            array(std::string(gate_names[g]) + "_v", blk.v);
            varray(std::string(gate_names[g]) + "_c", blk.c);
        }
    }
    array("w_out", p.w_out);
    varray("b_out", p.b_out);
}

inline NetworkParameters load_checkpoint(std::istream& is, std::string* metadata = nullptr) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (tag != "prn-checkpoint" || version != 1)
        throw FormatError("checkpoint: bad magic or unsupported version");
    auto expect = [&](const std::string& want) {
        std::string got;
        is >> got;
        if (got != want)
            throw FormatError("checkpoint: expected '" + want + "', got '" + got + "'");
    };
    std::string cell_name;
    int n = 0, d = 0;
    expect("cell");
    is >> cell_name;
    expect("n");
    is >> n;
    expect("d");
    is >> d;
    expect("meta");
    is.ignore();
    std::string meta_line;
    std::getline(is, meta_line);
    if (metadata) *metadata = meta_line;

    NetworkParameters p = NetworkParameters::shaped(cell_kind_from_string(cell_name), n, d);
    auto read_array = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols,
                          auto&& sink) {
        std::string kw, got;
        Eigen::Index r = 0, c = 0;
        is >> kw >> got >> r >> c;
        if (kw != "array" || got != name || r != rows || c != cols)
            throw FormatError("checkpoint: bad array record for " + name);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                double v = 0.0;
                if (!(is >> v)) throw FormatError("checkpoint: truncated array " + name);
                sink(i, j, v);
            }
    };
    auto into_m = [](Matrix& m) {
        return [&m](Eigen::Index i, Eigen::Index j, double v) { m(i, j) = v; };
    };
    auto into_v = [](Vector& vec) {
        return [&vec](Eigen::Index i, Eigen::Index, double v) { vec(i) = v; };
    };
    if (p.cell == CellKind::Basic) {
        read_array("w_x", n, d, into_m(p.w_x));
        read_array("w_s", n, n, into_m(p.w_s));
        read_array("b_s", n, 1, into_v(p.b_s));
    } else {
        static const char* gate_names[4] = {"input", "forget", "output", "candidate"};
        for (int g = 0; g < 4; ++g) {
            auto& blk = p.gates[static_cast<std::size_t>(g)];
            read_array(std::string(gate_names[g]) + "_u", n, d, into_m(blk.u));
            read_array(std::string(gate_names[g]) + "_v", n, n, into_m(blk.v));
            read_array(std::string(gate_names[g]) + "_c", n, 1, into_v(blk.c));
        }
    }
    read_array("w_out", d, n, into_m(p.w_out));
    read_array("b_out", d, 1, into_v(p.b_out));
    return p;
}

// ---------------------------------------------------------------------------
// Report CSVs.
// ---------------------------------------------------------------------------

inline void write_training_log_csv(std::ostream& os, const TrainHistory& history) {
    os << "epoch,train_error,val_error,clip_events\n";
    for (std::size_t e = 0; e < history.epochs.size(); ++e) {
        const auto& r = history.epochs[e];
        os << (e + 1) << "," << io::fmt(r.train_error) << "," << io::fmt(r.validation_error)
           << "," << r.clip_events << "\n";
    }
}

/// Prediction CSV with run metadata in comment lines. Truth columns are
/// included when a ground-truth continuation is supplied.
inline void write_prediction_csv(std::ostream& os, const PredictionRun& run,
                                 std::span<const Vector> truth_continuation = {},
                                 const std::string& checkpoint_id = "") {
    const int d = run.predictions.empty() ? 0 : static_cast<int>(run.predictions.front().size());
    os << "# algorithm=" << to_string(run.algorithm) << " m=" << run.input.size()
       << " p=" << run.horizon;
    if (run.window_cap) os << " cap=" << *run.window_cap;
    if (!checkpoint_id.empty()) os << " checkpoint=" << checkpoint_id;
    os << "\n";
    os << "round";
    for (int k = 0; k < d; ++k) os << ",xbar_" << (k + 1);
    if (!truth_continuation.empty())
        for (int k = 0; k < d; ++k) os << ",f_" << (k + 1);
    os << "\n";
    for (std::size_t j = 0; j < run.predictions.size(); ++j) {
        os << (j + 1);
        for (int k = 0; k < d; ++k) os << "," << io::fmt(run.predictions[j](k));
        if (!truth_continuation.empty())
            for (int k = 0; k < d; ++k) os << "," << io::fmt(truth_continuation[j](k));
        os << "\n";
    }
}

inline void write_noise_report_csv(std::ostream& os, const NoiseReport& rep) {
    os << "i,sigma_norm,jacobian_sr,residual\n";
    for (std::size_t i = 0; i < rep.sigma_trace.size(); ++i) {
        os << (i + 1) << "," << io::fmt(rep.sigma_trace[i].norm()) << ","
           << io::fmt(rep.jacobian_sr[i]) << "," << io::fmt(rep.residuals[i]) << "\n";
    }
}

inline void write_smoothness_csv(std::ostream& os, const PredictionRun& run,
                                 std::span<const Vector> truth,
                                 const SmoothnessReport& rep) {
    const int d = run.predictions.empty() ? 0 : static_cast<int>(run.predictions.front().size());
    os << "round";
    for (int k = 0; k < d; ++k) os << ",pred_" << (k + 1);
    for (int k = 0; k < d; ++k) os << ",truth_" << (k + 1);
    os << ",deviation\n";
    for (std::size_t j = 0; j < run.predictions.size(); ++j) {
        os << (j + 1);
        for (int k = 0; k < d; ++k) os << "," << io::fmt(run.predictions[j](k));
        for (int k = 0; k < d; ++k) os << "," << io::fmt(truth[j](k));
        os << "," << io::fmt(rep.per_step_deviation[j]) << "\n";
    }
    os << "# rmse_pred_vs_truth=" << io::fmt(rep.rmse_pred_vs_truth)
       << " rmse_input_vs_truth=" << io::fmt(rep.rmse_input_vs_truth)
       << " smoothness_ratio=" << io::fmt(rep.smoothness_ratio)
       << " max_deviation=" << io::fmt(rep.max_deviation) << "\n";
}

inline void write_scatter_csv(std::ostream& os, const ScatterResult& res) {
    const int d = static_cast<int>(res.truth_target.size());
    os << "trial";
    for (int k = 0; k < d; ++k) os << ",pred_" << (k + 1);
    os << "\n";
    for (std::size_t t = 0; t < res.predictions.size(); ++t) {
        os << (t + 1);
        for (int k = 0; k < d; ++k) os << "," << io::fmt(res.predictions[t](k));
        os << "\n";
    }
    os << "mean";
    for (int k = 0; k < d; ++k) os << "," << io::fmt(res.mean(k));
    os << "\ntruth";
    for (int k = 0; k < d; ++k) os << "," << io::fmt(res.truth_target(k));
    os << "\n";
}

} // namespace prn
