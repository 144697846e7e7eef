// Experiment runner for the equivariant Szego kernel laboratory.
//
//   szegolab geometry     --config cfg.json [--out DIR]
//   szegolab sweep        --config cfg.json [--out DIR] [--workers N]
//   szegolab verify       --config cfg.json [--out DIR] [--tolerance X] [--seed N]
//   szegolab model-verify --config cfg.json [--out DIR] [--seed N]
//
// Exit codes: 0 success, 1 verification tolerance violated, 2 malformed
// config or I/O failure.

#include <CLI11.hpp>
#include <iostream>

#include "szegolab/szegolab.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    unsigned workers = 1;
    double tolerance = -1.0;  // <0 = use config value
    long long seed = -1;      // <0 = use config value
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_tolerance, bool with_seed) {
    cmd->add_option("--config", opts.config_path, "Path to the experiment config JSON")
        ->required();
    cmd->add_option("--out", opts.out_dir, "Output directory (created if missing)");
    cmd->add_option("--workers", opts.workers, "Worker thread count for internal parallelism");
    if (with_tolerance)
        cmd->add_option("--tolerance", opts.tolerance, "Relative-error gate (overrides config)");
    if (with_seed) cmd->add_option("--seed", opts.seed, "Sampling seed (overrides config)");
}

szegolab::RunContext make_context(const CommonOpts& opts) {
    szegolab::RunContext ctx;
    ctx.cfg = szegolab::ExperimentConfig::load(opts.config_path);
    ctx.out_dir = opts.out_dir;
    ctx.workers = opts.workers == 0 ? 1 : opts.workers;
    if (opts.tolerance >= 0.0) ctx.tolerance_override = opts.tolerance;
    if (opts.seed >= 0) ctx.seed_override = static_cast<std::uint64_t>(opts.seed);
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"szegolab: equivariant Szego kernel experiments on weighted spheres"};
    app.require_subcommand(1);

    CommonOpts geo_opts, sweep_opts, verify_opts, model_opts;
    CLI::App* geo = app.add_subcommand("geometry", "Per-point CR geometry table");
    add_common(geo, geo_opts, false, false);
    CLI::App* sweep = app.add_subcommand("sweep", "Kernel values over the configured k list");
    add_common(sweep, sweep_opts, false, false);
    CLI::App* verify = app.add_subcommand("verify", "Fit kernel asymptotics and compare predictions");
    add_common(verify, verify_opts, true, true);
    CLI::App* model = app.add_subcommand("model-verify", "Model-space kernel and bound checks");
    add_common(model, model_opts, true, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (geo->parsed()) return szegolab::run_geometry(make_context(geo_opts));
        if (sweep->parsed()) return szegolab::run_sweep(make_context(sweep_opts));
        if (verify->parsed()) return szegolab::run_verify(make_context(verify_opts));
        if (model->parsed()) return szegolab::run_model_verify(make_context(model_opts));
    } catch (const szegolab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
