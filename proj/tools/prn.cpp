// Experiment runner: generate data, train, predict and analyze small
// seq-to-one recurrent networks on noisy synthetic trajectories.

#include <CLI11.hpp>

#include <iostream>

#include "prn/experiment.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDivergence = 3, kIoError = 4 };

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prn - predictive recurrent network experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    std::uint64_t seed_override = 0;
    bool have_seed = false;

    app.add_option("--config", config_path, "experiment config file (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "csv | csv+svg")
        ->check(CLI::IsMember({"csv", "csv+svg"}));
    app.add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t s) {
            seed_override = s;
            have_seed = true;
        },
        "override the config master seed");

    auto* gen = app.add_subcommand("gen", "generate sequences and training corpus");
    auto* tr = app.add_subcommand("train", "train a network on the corpus");
    auto* pred = app.add_subcommand("predict", "run a prediction rollout");
    auto* ana = app.add_subcommand("analyze", "noise, contraction and scatter reports");
    auto* demo = app.add_subcommand("demo-averaging", "scatter preset only (Fig.5/6 style)");

    std::string resume;
    int epochs_override = -1;
    tr->add_option("--resume", resume, "resume from an existing checkpoint");
    tr->add_option("--epochs", epochs_override, "override epoch count (0 = load/save no-op)");

    std::string checkpoint;
    pred->add_option("--checkpoint", checkpoint, "checkpoint file (default <out>/checkpoint.txt)");
    ana->add_option("--checkpoint", checkpoint, "checkpoint file (default <out>/checkpoint.txt)");
    demo->add_option("--checkpoint", checkpoint, "checkpoint file (default <out>/checkpoint.txt)");

    std::string algo_override;
    pred->add_option("--algo", algo_override, "prediction algorithm: mw | ew | ml")
        ->check(CLI::IsMember({"mw", "ew", "ml"}));

    CLI11_PARSE(app, argc, argv);

    try {
        prn::ExperimentContext ctx;
        ctx.config = prn::load_config(config_path);
        if (have_seed) ctx.config.seed = seed_override;
        ctx.out_dir = out_dir;
        ctx.emit_svg = format == "csv+svg";
        if (!algo_override.empty())
            ctx.config.algorithm = prn::algorithm_from_string(algo_override);

        if (gen->parsed()) {
            prn::cmd_gen(ctx);
        } else if (tr->parsed()) {
            prn::cmd_train(ctx, resume,
                           epochs_override >= 0 ? std::optional<int>(epochs_override)
                                                : std::nullopt);
        } else if (pred->parsed()) {
            prn::cmd_predict(ctx, checkpoint);
        } else if (ana->parsed()) {
            prn::cmd_analyze(ctx, checkpoint);
        } else if (demo->parsed()) {
            prn::cmd_analyze(ctx, checkpoint, /*scatter_only=*/true);
        }
        return kOk;
    } catch (const prn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const prn::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kConfigError;
    } catch (const prn::DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return kDivergence;
    } catch (const prn::SpectralError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kDivergence;
    } catch (const prn::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
}
