#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sarcvx/geometry.hpp"

namespace sarcvx {

// Chirped disk-antenna pulse. Angular frequency and chirp rate are stored in
// dimensionless units (radians per time unit and per squared time unit).
struct SourcePulse {
    double omega0 = 0.6 * M_PI;       // carrier, 6*pi*1e8 Hz expressed per ns
    double alpha0 = 8.0e-3 * M_PI;    // chirp rate per ns^2
    double tau0 = 1.0;                // pulse duration
    double disk_radius = 0.1;         // radius of the radiating disk
    double disk_thickness = 0.05;     // half-thickness of the disk slab

    void validate() const {
        if (!(tau0 > 0.0)) throw ConfigError("pulse: duration must be positive");
        if (!(disk_radius > 0.0)) throw ConfigError("pulse: disk radius must be positive");
        if (!(disk_thickness > 0.0)) throw ConfigError("pulse: disk thickness must be positive");
    }
};

enum class TimeScheme { Implicit, Explicit };
enum class GradientMetric { Smoothed, Coordinate };
enum class RegNorm { H2, H4 };

// Every tunable of the pipeline. Defaults reproduce the reference setup:
// domain (-2,2)^3 at 81^3, three source lines of 28 positions, elevation
// pi/4, carrier 0.6*pi, and the inversion parameters lambda=1.05, alpha=0.49,
// gamma=1e-10 on an 8e-3 grid.
struct PipelineConfig {
    // inversion rectangle and functional weights
    double lambda = 1.05;           // Carleman weight exponent scale
    double alpha = 0.49;            // Carleman weight slope in time, in (0, 1/2)
    double gamma = 1e-10;           // regularization weight
    double dy = 8e-3;               // grid step along the travel-time axis
    double dtau = 8e-3;             // grid step along the pseudo-time axis
    double c_upper = 30.0;          // upper bound of the sought coefficient
    double b = std::sqrt(30.0);     // rectangle length; must be >= sqrt(c_upper)
    double t_tilde = 4.0 * std::sqrt(30.0);  // pseudo-time horizon; must be >= 4b
    RegNorm reg_norm = RegNorm::H2;

    // gradient descent
    double descent_step = 0.1;      // in (0, 1)
    int max_iters = 10000;
    double grad_tol = 1e-8;         // stop when |grad| < grad_tol * (1 + |J|)
    double ball_radius_max = 1e6;   // abort if the H2 norm of an iterate exceeds this
    GradientMetric metric = GradientMetric::Smoothed;
    int neumann_order = 2;          // order of the Y=0 Neumann data imposition

    // data preprocessing
    double cal_factor = 6.0e-2;     // delay-and-sum calibration factor CF
    bool smooth_boundary_data = true;  // 5-point moving average before differentiation
    double noise_sigma = 0.0;       // relative additive noise level, in [0, 1)
    unsigned long long seed = 1;

    // forward simulation
    double domain_radius = 2.0;     // cube (-R, R)^3
    int nx = 81;                    // grid points per axis
    double sim_time = 10.0;         // observation window T
    int nt = 1000;                  // number of recorded samples
    TimeScheme scheme = TimeScheme::Implicit;
    double sand_eps = 4.0;          // dielectric constant of the background sand

    SourcePulse pulse;
    AcquisitionGeometry geometry;

    int workers = 2;

    double grid_step() const { return 2.0 * domain_radius / (nx - 1); }
    double sample_dt() const { return sim_time / (nt - 1); }

    void validate() const;
};

PipelineConfig default_config();

// Parses a "key = value" file with '#' comments; unknown keys are rejected.
PipelineConfig load_config(const std::string& path);

void write_config(const PipelineConfig& cfg, const std::string& path);

}  // namespace sarcvx
