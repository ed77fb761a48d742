#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sarcvx/assembly.hpp"
#include "sarcvx/config.hpp"
#include "sarcvx/dielectric.hpp"
#include "sarcvx/record.hpp"

namespace sarcvx {

// Exit codes of the command-line runner.
enum ExitCode {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitInstability = 3,
    kExitEmptyDetection = 4,
    kExitDivergence = 5,
};

struct RunManifest {
    std::string model = "ellipsoid";  // ellipsoid | prism | path to a field file
    std::vector<std::string> stages;  // contiguous run of the stage list; empty = all
    std::string config_path;
    std::string out_dir = "out";
    std::string reference_records;  // reuse an existing reference acquisition
    unsigned long long seed = 1;
    double noise_sigma = -1.0;  // >= 0 overrides the config
    int grid_override = 0;      // > 0 overrides nx
    int workers = 0;            // > 0 overrides the config
    bool emit_plots = false;
};

struct PlaneSummary {
    int line = 0;
    double eps_max = 1.0;
    double inside_value = 1.0;
    int sources_inside = 0;
    double rect_x_lo = 0.0, rect_x_hi = 0.0;
    double rect_ys_lo = 0.0, rect_ys_hi = 0.0;
    int solver_iterations_total = 0;
};

struct RunReport {
    std::string model;
    double fused_eps = 1.0;
    std::vector<PlaneSummary> planes;
    std::array<double, 3> box_min{0, 0, 0};
    std::array<double, 3> box_max{0, 0, 0};
    double x_extent = 0.0;
    double travel_time_observed = 0.0;
    double travel_time_geometric = 0.0;
    double noise_sigma = 0.0;
    unsigned long long seed = 1;
    std::string signature;

    std::string to_json() const;
};

// Builds the named target medium: both reference targets are centered at
// (0, 0, -0.14) and buried in sand of constant 4.
DielectricField make_model(const std::string& name, const PipelineConfig& cfg);

// Executes the requested stages, reading earlier artifacts from the output
// directory when a stage is resumed. Returns the final report (only
// meaningful when the assemble stage ran).
RunReport run_pipeline(const RunManifest& manifest);

// CLI entry: maps exceptions onto exit codes.
int run(const RunManifest& manifest);

std::string config_signature(const PipelineConfig& cfg, const std::string& model,
                             unsigned long long seed);

}  // namespace sarcvx
