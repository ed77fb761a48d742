#pragma once

#include <vector>

#include "sarcvx/grid2d.hpp"
#include "sarcvx/line1d.hpp"

namespace sarcvx {

// Monotone travel-time coordinate Y(X) = int_0^X sqrt(c) together with its
// inverse, both tabulated on the profile grid.
struct TravelTimeMap {
    std::vector<double> x;  // profile grid
    std::vector<double> y;  // Y(x), strictly increasing

    double y_max() const { return y.back(); }
    double y_of_x(double xq) const;
    double x_of_y(double yq) const;
};

TravelTimeMap travel_time_map(const Profile1D& profile);

// Scattering potential on the uniform Y-grid starting at 0; vanishes outside
// [0, Y(1)] for any admissible profile.
struct PotentialProfile {
    double dy = 0.0;
    std::vector<double> p;

    double y_at(size_t i) const { return dy * static_cast<double>(i); }
    double y_end() const { return y_at(p.size() - 1); }
    double value(double yq) const;  // linear interpolation, 0 outside
};

// p = Q''/Q - 2 (Q'/Q)^2 with Q(Y) = c^{-1/4}(X(Y)), centered differences on
// the uniform Y-grid of step dy covering [0, y_span].
PotentialProfile potential_from_profile(const Profile1D& profile, double dy, double y_span);

// Inverts the map above: integrates Q'' = p Q + 2 (Q')^2 / Q with Q(0) = 1,
// Q'(0) = 0 (forced by c = 1 and smoothness left of the support), then
// resamples c = Q^{-4} through X(Y) = int_0^Y Q^2 onto a uniform X-grid.
// Throws SolverError if Q collapses or blows up.
Profile1D recover_profile(const PotentialProfile& pot, double x0, double dx, int n_samples);

// Sampled coefficient in travel-time coordinates, c(Y) = Q(Y)^{-4}; this is
// the natural axis for slant-range images.
std::vector<double> recover_coefficient_of_y(const PotentialProfile& pot);

// Dirichlet/Neumann data differentiated into the boundary data of the
// nonlocal problem: q0 = g0', q1 = g0'' + g1'.
struct BvpData {
    double dt = 0.0;
    std::vector<double> q0;
    std::vector<double> q1;
};

BvpData bvp_data_from_boundary(const BoundaryData1D& g, bool smooth = false);

// p(Y) = 4 dV/dY at tau = 0, centered in Y along the first row.
PotentialProfile potential_from_solution(const GridFunction2D& V);

// ---- travel-time-domain forward solve -------------------------------------
// Solves the potential form w_tt = w_YY + p w with impulsive initial
// velocity by splitting off the singular direct wave (1/2) H(tau - |Y|) and
// time-stepping only the smooth remainder. Serves as an independent data
// route and as the oracle for the nonlocal formulation.
struct RemainderField {
    double y0 = 0.0, dy = 0.0, dt = 0.0;
    int ny = 0, nt = 0;
    std::vector<double> rho;  // idx = iy + ny*it

    double at(int iy, int it) const { return rho[static_cast<size_t>(it) * ny + iy]; }
    double sample(double yq, double tq) const;  // bilinear, clamped
};

// dy = 0 picks a stable step from dt; passing the target sampling step makes
// the grids nest so derived fields can be differentiated without
// interpolation noise.
RemainderField solve_remainder(const PotentialProfile& pot, double t_max, double dt,
                               double dy = 0.0);

BoundaryData1D boundary_from_remainder(const RemainderField& field);

// Exact solution of the nonlocal problem on the rectangle grid, obtained by
// shifting the remainder onto characteristic coordinates and differentiating
// in time. Used to check that the PDE residual vanishes under refinement.
GridFunction2D solution_from_remainder(const RemainderField& field, int ny, int nt, double dy,
                                       double dtau);

}  // namespace sarcvx
