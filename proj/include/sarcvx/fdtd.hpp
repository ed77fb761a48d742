#pragma once

#include "sarcvx/config.hpp"
#include "sarcvx/dielectric.hpp"
#include "sarcvx/record.hpp"

namespace sarcvx {

// Chirped pulse: Re( chi_D * exp(-i w0 t) * exp(-i a0 (t - tau0/2)^2) ) for
// t in (0, tau0], zero afterwards. chi_D is the indicator of the tilted disk.
double chirp_time_factor(const SourcePulse& pulse, double t);

// Translation to the source followed by the elevation rotation about x.
Vec3 rotate_to_antenna_frame(const Vec3& x, const Vec3& x0, double elevation_angle);

bool disk_indicator(const Vec3& x, const Vec3& x0, const SourcePulse& pulse,
                    double elevation_angle);

// Two-level wave state of the scalar solver.
struct WaveState {
    int n = 0;
    double h = 0.0, dt = 0.0;
    int step = 0;
    std::vector<double> u_prev, u_curr;
};

// Simulates eps_r * u_tt = lap(u) + F over the cube with first-order
// absorbing walls and records u at the source point. Samples land on the
// uniform grid of nt points over [0, T]; the explicit scheme substeps
// internally when the sample interval violates its stability bound.
TimeSeriesRecord simulate(const DielectricField& medium, const AcquisitionGeometry& geometry,
                          const SourcePulse& pulse, int line, int source, double t_max, int nt,
                          TimeScheme scheme);

// All (line, source) pairs of the geometry, in a worker pool.
RecordSet simulate_all(const DielectricField& medium, const AcquisitionGeometry& geometry,
                       const SourcePulse& pulse, double t_max, int nt, TimeScheme scheme,
                       int workers);

}  // namespace sarcvx
