#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sarcvx/grid2d.hpp"
#include "sarcvx/line1d.hpp"
#include "sarcvx/solver.hpp"
#include "sarcvx/transform.hpp"

namespace sarcvx::testing {

// quintic smoothstep, C2 at both ends
inline double sstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// C-infinity smoothstep: exactly 0 below 0 and 1 above 1, all derivatives
// vanish at both ends. Profiles built from it are compactly supported and
// smooth at any grid resolution.
inline double xstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = std::exp(-1.0 / t);
    double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

// Smooth admissible profile: 1 outside (0, 1), a single asymmetric hill with
// maximum in [4, c_hi]. Rise widths stay generous so the potential remains
// resolvable on the 8e-3 working grid; the support stands clear of both
// interval ends.
inline Profile1D random_profile(std::mt19937_64& rng, double c_hi = 30.0) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double target = 4.0 + (c_hi - 4.0) * uni(rng);  // profile maximum
    double r1 = 0.44 + 0.03 * uni(rng);             // rise width
    double r2 = 0.44 + 0.03 * uni(rng);             // fall width
    double slack = 1.0 - r1 - r2;                   // >= 0.06
    double off1 = slack * (0.3 + 0.4 * uni(rng));   // left standoff
    double ctr = off1 + r1;

    Profile1D prof;
    prof.x0 = -0.25;
    prof.dx = 1.0 / 6400.0;
    int n = static_cast<int>(std::lround((1.5 - prof.x0) / prof.dx)) + 1;
    prof.c.assign(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        double x = prof.x_at(static_cast<size_t>(i));
        double shape = x < ctr ? xstep((x - off1) / r1) : xstep((ctr + r2 - x) / r2);
        prof.c[static_cast<size_t>(i)] = 1.0 + (target - 1.0) * shape;
    }
    return prof;
}

// Single smooth bump with the given maximum, centered at 0.5.
inline Profile1D bump_profile(double c_max, double width = 0.35) {
    Profile1D prof;
    prof.x0 = -0.25;
    prof.dx = 1.0 / 6400.0;
    int n = static_cast<int>(std::lround((1.5 - prof.x0) / prof.dx)) + 1;
    prof.c.assign(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        double x = prof.x_at(static_cast<size_t>(i));
        double t = 1.0 - std::abs(x - 0.5) / width;
        prof.c[static_cast<size_t>(i)] = 1.0 + (c_max - 1.0) * xstep(t);
    }
    return prof;
}

// Random element of the zero-trace subspace used by the energy-inequality
// and convexity certifications; sup-normalized.
inline GridFunction2D random_h02_sample(std::mt19937_64& rng, int ny, int nt, double dy,
                                        double dtau, int modes = 4) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    GridFunction2D u(ny, nt, dy, dtau);
    double b = dy * (ny - 1);
    double T = dtau * (nt - 1);
    std::vector<double> coef(static_cast<size_t>(modes * (modes + 1)));
    for (auto& c : coef) c = uni(rng);
    for (int it = 0; it < nt; ++it) {
        double tau = dtau * it;
        for (int iy = 0; iy < ny; ++iy) {
            double y = dy * iy;
            double phi = 1.0 - std::cos(M_PI * y / b);
            phi *= phi;
            double acc = 0.0;
            for (int k = 1; k <= modes; ++k)
                for (int l = 0; l <= modes; ++l)
                    acc += coef[static_cast<size_t>((k - 1) * (modes + 1) + l)] / (k + l + 1.0) *
                           std::cos(k * M_PI * y / b) * std::cos(l * M_PI * tau / T);
            u.at(iy, it) = phi * acc;
        }
    }
    double sup = 0.0;
    for (double v : u.v) sup = std::max(sup, std::abs(v));
    if (sup > 0.0)
        for (double& v : u.v) v /= sup;
    return u;
}

// Boundary data of a synthetic profile through the travel-time-domain solve.
struct SyntheticProblem {
    Profile1D profile;
    PotentialProfile pot;
    BoundaryData1D g;
    BvpData q;
};

inline SyntheticProblem make_synthetic(const Profile1D& prof, double t_tilde, double dtau,
                                       double pot_dy, double pot_span) {
    SyntheticProblem s;
    s.profile = prof;
    s.pot = potential_from_profile(prof, pot_dy, pot_span);
    RemainderField field = solve_remainder(s.pot, t_tilde + 1.0, dtau);
    BoundaryData1D g = boundary_from_remainder(field);
    int nt = static_cast<int>(std::lround(t_tilde / dtau)) + 1;
    g.g0.resize(static_cast<size_t>(nt));
    g.g1.resize(static_cast<size_t>(nt));
    s.g = g;
    s.q = bvp_data_from_boundary(s.g, false);
    return s;
}

}  // namespace sarcvx::testing
