#include "sarcvx/transform.hpp"

#include <algorithm>
#include <cmath>

#include "sarcvx/stencils.hpp"

namespace sarcvx {

namespace {

double interp_monotone(const std::vector<double>& xs, const std::vector<double>& ys, double xq) {
    if (xq <= xs.front()) return ys.front() + (xq - xs.front());  // unit slope outside
    if (xq >= xs.back()) return ys.back() + (xq - xs.back());
    auto it = std::upper_bound(xs.begin(), xs.end(), xq);
    size_t i = static_cast<size_t>(it - xs.begin());
    double w = (xq - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

}  // namespace

double TravelTimeMap::y_of_x(double xq) const { return interp_monotone(x, y, xq); }
double TravelTimeMap::x_of_y(double yq) const { return interp_monotone(y, x, yq); }

TravelTimeMap travel_time_map(const Profile1D& profile) {
    if (profile.c.size() < 2) throw SolverError("travel_time_map: profile too short");
    TravelTimeMap map;
    size_t n = profile.c.size();
    map.x.resize(n);
    std::vector<double> speed(n);
    for (size_t i = 0; i < n; ++i) {
        map.x[i] = profile.x_at(i);
        double c = profile.c[i];
        if (!(c >= 1.0 - 1e-9) || !std::isfinite(c))
            throw SolverError("travel_time_map: profile must satisfy c >= 1");
        speed[i] = std::sqrt(c);
    }
    map.y = cumint4(speed, profile.dx);
    // anchor Y(0) = 0; left of the grid c = 1, so Y(x0) = x0
    for (auto& v : map.y) v += profile.x0;
    for (size_t i = 1; i < n; ++i)
        if (!(map.y[i] > map.y[i - 1])) throw SolverError("travel_time_map: map not increasing");
    return map;
}

double PotentialProfile::value(double yq) const {
    if (p.empty() || yq <= 0.0 || yq >= y_end()) return 0.0;
    return interp_cubic_uniform(p, 0.0, dy, yq);
}

PotentialProfile potential_from_profile(const Profile1D& profile, double dy, double y_span) {
    TravelTimeMap map = travel_time_map(profile);
    // Q''/Q - 2 (Q'/Q)^2 with Q = c^{-1/4} and d/dY = c^{-1/2} d/dX reduces
    // algebraically to (5/16) (c')^2 / c^3 - (1/4) c'' / c^2, which needs only
    // two derivatives of the smooth profile samples.
    size_t n = profile.c.size();
    std::vector<double> cp = deriv1_o4(profile.c, profile.dx);
    std::vector<double> cpp = deriv2_o4(profile.c, profile.dx);
    std::vector<double> p_of_x(n);
    for (size_t i = 0; i < n; ++i) {
        double c = profile.c[i];
        p_of_x[i] = (5.0 / 16.0) * cp[i] * cp[i] / (c * c * c) - 0.25 * cpp[i] / (c * c);
    }
    // resample values onto the uniform Y grid (no differentiation after this)
    PotentialProfile pot;
    pot.dy = dy;
    int ny = static_cast<int>(std::ceil(y_span / dy)) + 1;
    pot.p.assign(static_cast<size_t>(ny), 0.0);
    for (int k = 0; k < ny; ++k) {
        double yq = dy * k;
        if (yq <= map.y.front() || yq >= map.y.back()) continue;
        pot.p[static_cast<size_t>(k)] =
            interp_cubic_uniform(p_of_x, profile.x0, profile.dx, map.x_of_y(yq));
    }
    return pot;
}

namespace {

// Sine-series refinement of the sampled potential. The potential is smooth
// and compactly supported inside the table, so the odd extension of the
// detrended samples recovers the values between nodes to near machine
// precision; local interpolation of a spiky table would lose several digits
// of the travel-time phase instead.
struct RefinedPotential {
    double dy_fine = 0.0;
    std::vector<double> fine;

    explicit RefinedPotential(const PotentialProfile& pot, int refine = 8) {
        const int n = static_cast<int>(pot.p.size());
        const double l = pot.dy * (n - 1);
        dy_fine = pot.dy / refine;
        int nf = (n - 1) * refine + 1;
        fine.assign(static_cast<size_t>(nf), 0.0);
        if (n < 4) {
            for (int i = 0; i < nf; ++i)
                fine[static_cast<size_t>(i)] = lerp_uniform(pot.p, 0.0, pot.dy, dy_fine * i);
            return;
        }
        double a0 = pot.p.front(), a1 = pot.p.back();
        std::vector<double> coef(static_cast<size_t>(n - 2), 0.0);
        for (int k = 1; k + 1 < n; ++k) {
            double acc = 0.0;
            for (int j = 1; j + 1 < n; ++j) {
                double detr = pot.p[static_cast<size_t>(j)] -
                              (a0 + (a1 - a0) * j / static_cast<double>(n - 1));
                acc += detr * std::sin(M_PI * k * j / static_cast<double>(n - 1));
            }
            coef[static_cast<size_t>(k - 1)] = 2.0 * acc / (n - 1);
        }
        for (int i = 0; i < nf; ++i) {
            double y = dy_fine * i;
            double t = y / l;
            double acc = a0 + (a1 - a0) * t;
            for (int k = 1; k + 1 < n; ++k)
                acc += coef[static_cast<size_t>(k - 1)] * std::sin(M_PI * k * t);
            fine[static_cast<size_t>(i)] = acc;
        }
        // keep the sample nodes bit-exact
        for (int j = 0; j < n; ++j)
            fine[static_cast<size_t>(j) * refine] = pot.p[static_cast<size_t>(j)];
    }

    double value(double yq) const {
        if (yq <= 0.0 || yq >= dy_fine * (fine.size() - 1)) return 0.0;
        return interp_cubic_uniform(fine, 0.0, dy_fine, yq);
    }
};

struct QState {
    double q;
    double dq;
};

QState rk4_step(const RefinedPotential& pot, double y, double h, QState s) {
    auto rhs = [&](double yy, QState u) -> QState {
        if (!(u.q > 1e-6) || !std::isfinite(u.q))
            throw SolverError("recover_profile: Q collapsed near Y = " + std::to_string(yy));
        return {u.dq, pot.value(yy) * u.q + 2.0 * u.dq * u.dq / u.q};
    };
    QState k1 = rhs(y, s);
    QState k2 = rhs(y + 0.5 * h, {s.q + 0.5 * h * k1.q, s.dq + 0.5 * h * k1.dq});
    QState k3 = rhs(y + 0.5 * h, {s.q + 0.5 * h * k2.q, s.dq + 0.5 * h * k2.dq});
    QState k4 = rhs(y + h, {s.q + h * k3.q, s.dq + h * k3.dq});
    return {s.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
            s.dq + h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq)};
}

// Integrates the Q equation across the grid of pot, returning Q and Q'.
// Substeps keep the one-step error well under the grid representation error.
void integrate_q(const PotentialProfile& pot, std::vector<double>& q, std::vector<double>& dq) {
    const int substeps = 8;
    RefinedPotential refined(pot);
    size_t n = pot.p.size();
    q.resize(n);
    dq.resize(n);
    QState s{1.0, 0.0};
    q[0] = 1.0;
    dq[0] = 0.0;
    const double h = pot.dy / substeps;
    for (size_t i = 1; i < n; ++i) {
        for (int k = 0; k < substeps; ++k)
            s = rk4_step(refined, pot.y_at(i - 1) + h * k, h, s);
        if (!std::isfinite(s.q) || s.q > 1e6)
            throw SolverError("recover_profile: Q blew up near Y = " + std::to_string(pot.y_at(i)));
        q[i] = s.q;
        dq[i] = s.dq;
    }
}

// cubic Hermite value within the cell [i, i+1] at local parameter t
double hermite(double q0, double d0, double q1, double d1, double h, double t) {
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * q0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * q1 +
           (t3 - t2) * h * d1;
}

}  // namespace

Profile1D recover_profile(const PotentialProfile& pot, double x0, double dx, int n_samples) {
    if (pot.p.size() < 2) throw SolverError("recover_profile: empty potential");
    std::vector<double> q, dq;
    integrate_q(pot, q, dq);
    size_t n = q.size();
    std::vector<double> q2(n);
    for (size_t i = 0; i < n; ++i) q2[i] = q[i] * q[i];
    std::vector<double> x_of_y = cumint4(q2, pot.dy);
    const double h = pot.dy;

    // partial integral of Q^2 across cell i up to local parameter t, with Q
    // evaluated by Hermite interpolation (Simpson is plenty at this width)
    auto cell_x = [&](size_t i, double t) {
        auto q_at = [&](double tt) { return hermite(q[i], dq[i], q[i + 1], dq[i + 1], h, tt); };
        double f0 = q_at(0.0), fm = q_at(0.5 * t), f1 = q_at(t);
        return x_of_y[i] + h * t / 6.0 * (f0 * f0 + 4.0 * fm * fm + f1 * f1);
    };

    Profile1D out;
    out.x0 = x0;
    out.dx = dx;
    out.c.assign(static_cast<size_t>(n_samples), 1.0);
    for (int k = 0; k < n_samples; ++k) {
        double xq = x0 + dx * k;
        if (xq <= 0.0 || xq >= x_of_y.back()) continue;
        auto it = std::upper_bound(x_of_y.begin(), x_of_y.end(), xq);
        size_t i = static_cast<size_t>(it - x_of_y.begin()) - 1;
        // invert the in-cell map by bisection
        double lo = 0.0, hi = 1.0;
        for (int step = 0; step < 40; ++step) {
            double mid = 0.5 * (lo + hi);
            (cell_x(i, mid) < xq ? lo : hi) = mid;
        }
        double t = 0.5 * (lo + hi);
        double qi = hermite(q[i], dq[i], q[i + 1], dq[i + 1], h, t);
        out.c[static_cast<size_t>(k)] = std::pow(qi, -4.0);
    }
    return out;
}

std::vector<double> recover_coefficient_of_y(const PotentialProfile& pot) {
    std::vector<double> q, dq;
    integrate_q(pot, q, dq);
    for (auto& v : q) v = std::pow(v, -4.0);
    return q;
}

BvpData bvp_data_from_boundary(const BoundaryData1D& g, bool smooth) {
    if (g.g0.size() < 4 || g.g1.size() != g.g0.size())
        throw SolverError("bvp_data_from_boundary: need at least 4 matched samples");
    std::vector<double> g0 = smooth ? moving_average5(g.g0) : g.g0;
    std::vector<double> g1 = smooth ? moving_average5(g.g1) : g.g1;
    BvpData q;
    q.dt = g.dt;
    q.q0 = deriv1(g0, g.dt);
    std::vector<double> g0pp = deriv2(g0, g.dt);
    std::vector<double> g1p = deriv1(g1, g.dt);
    q.q1.resize(g0.size());
    for (size_t i = 0; i < g0.size(); ++i) q.q1[i] = g0pp[i] + g1p[i];
    return q;
}

PotentialProfile potential_from_solution(const GridFunction2D& V) {
    if (V.ny < 3) throw SolverError("potential_from_solution: grid too small");
    std::vector<double> row(static_cast<size_t>(V.ny));
    for (int iy = 0; iy < V.ny; ++iy) row[static_cast<size_t>(iy)] = V.at(iy, 0);
    std::vector<double> d = deriv1(row, V.dy);
    PotentialProfile pot;
    pot.dy = V.dy;
    pot.p.resize(d.size());
    for (size_t i = 0; i < d.size(); ++i) pot.p[i] = 4.0 * d[i];
    return pot;
}

double RemainderField::sample(double yq, double tq) const {
    double fy = std::clamp((yq - y0) / dy, 0.0, static_cast<double>(ny - 1));
    double ft = std::clamp(tq / dt, 0.0, static_cast<double>(nt - 1));
    int i = std::min(static_cast<int>(fy), ny - 2);
    int k = std::min(static_cast<int>(ft), nt - 2);
    double wy = fy - i, wt = ft - k;
    return at(i, k) * (1 - wy) * (1 - wt) + at(i + 1, k) * wy * (1 - wt) +
           at(i, k + 1) * (1 - wy) * wt + at(i + 1, k + 1) * wy * wt;
}

RemainderField solve_remainder(const PotentialProfile& pot, double t_max, double dt, double dy) {
    RemainderField f;
    f.dt = dt;
    // The potential term destabilizes the leapfrog exactly at unit CFL, so
    // the default keeps a margin; callers may pass dy = dt (dispersion-free
    // nested grids) when the potential is weak and the run short.
    f.dy = dy > 0.0 ? dy : dt / 0.8;
    if (dt > f.dy + 1e-15)
        throw SolverError("solve_remainder: dt must not exceed the grid step");
    double p_low = 0.0;
    for (double v : pot.p) p_low = std::min(p_low, v);
    double ratio2 = (dt * dt) / (f.dy * f.dy);
    if (ratio2 + 0.25 * dt * dt * std::abs(p_low) > 1.0 + 1e-12)
        throw SolverError("solve_remainder: unstable step for this potential; lower dt or dy ratio");
    // keep Y = 0 exactly on the grid
    f.y0 = -f.dy * std::ceil(1.0 / f.dy);
    double y_right = std::max(pot.y_end() + 1.0, 0.5 * t_max + 1.0);
    f.ny = static_cast<int>(std::ceil((y_right - f.y0) / f.dy)) + 1;
    f.nt = static_cast<int>(std::lround(t_max / dt)) + 1;
    f.rho.assign(static_cast<size_t>(f.ny) * f.nt, 0.0);

    std::vector<double> pv(static_cast<size_t>(f.ny));
    for (int i = 0; i < f.ny; ++i) pv[static_cast<size_t>(i)] = pot.value(f.y0 + f.dy * i);

    std::vector<double> um(f.ny, 0.0), uc(f.ny, 0.0), up(f.ny, 0.0);
    const double r2 = dt * dt / (f.dy * f.dy);
    for (int k = 2; k < f.nt; ++k) {
        double t_prev = dt * (k - 1);
        for (int i = 1; i + 1 < f.ny; ++i) {
            double yy = f.y0 + f.dy * i;
            // area fraction of the update cell behind the front t = |Y|; the
            // front runs along a characteristic, so cells centered on it are
            // exactly half covered
            double xi = (t_prev - std::abs(yy)) / dt;
            double w = std::clamp(0.5 * (xi + 1.0), 0.0, 1.0);
            up[i] = 2.0 * uc[i] - um[i] + r2 * (uc[i + 1] - 2.0 * uc[i] + uc[i - 1]) +
                    dt * dt * (pv[i] * uc[i] + 0.5 * pv[i] * w);
        }
        const double mur = (dt - f.dy) / (dt + f.dy);
        up[0] = uc[1] + mur * (up[1] - uc[0]);
        up[f.ny - 1] = uc[f.ny - 2] + mur * (up[f.ny - 2] - uc[f.ny - 1]);
        std::swap(um, uc);
        std::swap(uc, up);
        if (!std::isfinite(uc[f.ny / 2]))
            throw SolverError("solve_remainder: instability at step " + std::to_string(k));
        for (int i = 0; i < f.ny; ++i) f.rho[static_cast<size_t>(k) * f.ny + i] = uc[i];
    }
    return f;
}

BoundaryData1D boundary_from_remainder(const RemainderField& field) {
    BoundaryData1D g;
    g.dt = field.dt;
    g.g0.assign(static_cast<size_t>(field.nt), 0.5);
    g.g1.assign(static_cast<size_t>(field.nt), 0.0);
    const int i0 = static_cast<int>(std::lround((0.0 - field.y0) / field.dy));
    if (std::abs(field.y0 + field.dy * i0) > 1e-9)
        throw SolverError("boundary_from_remainder: Y = 0 is off the grid");
    for (int k = 0; k < field.nt; ++k) {
        g.g0[static_cast<size_t>(k)] = 0.5 + field.at(i0, k);
        g.g1[static_cast<size_t>(k)] =
            (field.at(i0 + 1, k) - field.at(i0 - 1, k)) / (2.0 * field.dy);
    }
    return g;
}

GridFunction2D solution_from_remainder(const RemainderField& field, int ny, int nt, double dy,
                                       double dtau) {
    // V(Y, tau) = d/dtau rho(Y, tau + Y). The time derivative of the
    // remainder jumps across the characteristic t = |Y| (by a quarter of the
    // running integral of the potential), and the sample points sit exactly
    // on that front at tau = 0, so differentiate one-sidedly from the future
    // side everywhere.
    RemainderField dfield = field;
    for (int i = 0; i < field.ny; ++i) {
        for (int k = 0; k < field.nt; ++k) {
            double d;
            if (k + 2 < field.nt)
                d = (-3.0 * field.at(i, k) + 4.0 * field.at(i, k + 1) - field.at(i, k + 2)) /
                    (2.0 * field.dt);
            else
                d = (field.at(i, k) - field.at(i, k - 1)) / field.dt;
            dfield.rho[static_cast<size_t>(k) * field.ny + i] = d;
        }
    }
    GridFunction2D V(ny, nt, dy, dtau);
    for (int it = 0; it < nt; ++it)
        for (int iy = 0; iy < ny; ++iy)
            V.at(iy, it) = dfield.sample(dy * iy, dtau * it + dy * iy);
    return V;
}

}  // namespace sarcvx
