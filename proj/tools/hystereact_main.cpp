#include <CLI11.hpp>

#include "hystereact/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"1-D reaction-diffusion with distributed relay hysteresis"};
    app.set_version_flag("--version", hystereact::kVersion);
    app.require_subcommand(1);

    hystereact::CliOptions opts;
    const char* kinds[] = {"simulate", "slowfast", "verify-branch",
                           "sweep",    "compare",  "kernel-check"};
    const char* blurbs[] = {"run the relay-hysteresis PDE and write the trajectory",
                            "run the slow-fast regularization",
                            "check the branch regularity condition",
                            "run a family of experiments over one axis",
                            "compare a slow-fast run to the hysteresis limit",
                            "check the discrete heat-kernel decay bound"};
    for (int i = 0; i < 6; ++i) {
        auto* sub = app.add_subcommand(kinds[i], blurbs[i]);
        sub->add_option("--config", opts.config_path, "experiment description (JSON)")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory (overrides the config)");
        sub->add_option("--jobs", opts.jobs, "worker threads for sweeps");
        sub->callback([&opts, i, &kinds] { opts.kind = kinds[i]; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage problems are config errors
    }
    return hystereact::run_cli(opts);
}
