#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sarcvx/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Convexification-based nonlinear SAR reconstruction pipeline"};

    sarcvx::RunManifest manifest;
    std::string stages;
    double noise = -1.0;

    app.add_option("--config", manifest.config_path, "configuration file (key = value)");
    app.add_option("--model", manifest.model, "ellipsoid | prism | path to a field file")
        ->default_val("ellipsoid");
    app.add_option("--stages", stages,
                   "comma list out of simulate,preprocess,invert,assemble (default: all)");
    app.add_option("--noise", noise, "additive noise level sigma in [0,1)");
    app.add_option("--seed", manifest.seed, "noise seed")->default_val(1);
    app.add_option("--out", manifest.out_dir, "output directory")->default_val("out");
    app.add_option("--workers", manifest.workers, "worker threads (0 = config value)");
    app.add_option("--grid", manifest.grid_override, "override the spatial grid size N");
    app.add_option("--reference", manifest.reference_records,
                   "reuse reference records from a previous run");
    app.add_flag("--emit-plots", manifest.emit_plots, "write plot-ready CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : sarcvx::kExitConfig;
    }

    manifest.noise_sigma = noise;
    if (!stages.empty()) {
        size_t pos = 0;
        while (pos != std::string::npos) {
            size_t comma = stages.find(',', pos);
            std::string item = stages.substr(pos, comma == std::string::npos ? comma : comma - pos);
            if (!item.empty()) manifest.stages.push_back(item);
            pos = comma == std::string::npos ? comma : comma + 1;
        }
    }
    return sarcvx::run(manifest);
}
