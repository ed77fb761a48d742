#pragma once

#include <vector>

#include "sarcvx/errors.hpp"

namespace sarcvx {

// Coefficient profile for the 1D problem c(X) u_tt = u_XX: equals 1 outside
// (0, 1)-ish support, lies in [4, c_upper] in the interior, and blends
// smoothly at both ends.
struct Profile1D {
    double x0 = 0.0;  // coordinate of the first sample
    double dx = 0.0;
    std::vector<double> c;

    double x_at(size_t i) const { return x0 + dx * static_cast<double>(i); }
    double x_end() const { return x_at(c.size() - 1); }
    double value(double x) const;  // linear interpolation, 1 outside the grid
    double max_value() const;
};

// Dirichlet and Neumann traces of the 1D solution at X = 0.
struct BoundaryData1D {
    double dt = 0.0;
    std::vector<double> g0;  // u(0, tau)
    std::vector<double> g1;  // u_X(0, tau)

    // Measured level of the direct arrival; 0.5 for exact impulse data.
    double direct_level = 0.5;
    // Set when the direct level deviates from 1/2 by more than 20%.
    bool scale_warning = false;
};

// Solves c(X) u_tt = u_XX with zero displacement and an impulsive initial
// velocity at X = 0, recording both traces at X = 0 up to time t_max.
// The impulse is regularized as a normalized triangle of half-width 2*dx;
// traces are normalized so the direct level equals exactly 1/2.
BoundaryData1D solve_1d_forward(const Profile1D& profile, double t_max, double dt);

// Alternative route for the same data: solve in travel-time coordinates for
// the smooth remainder after subtracting the closed-form direct wave
// (1/2) H(tau - |Y|). Needs the potential and travel-time map of the profile,
// so it lives behind the transform header; see transform.hpp.

// Writes tau, g0, g1 columns for debugging.
void dump_boundary_csv(const BoundaryData1D& g, const std::string& path);

}  // namespace sarcvx
