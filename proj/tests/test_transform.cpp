#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sarcvx/transform.hpp"
#include "support.hpp"

using namespace sarcvx;
using namespace sarcvx::testing;

namespace {

Profile1D constant_profile(double value, double dx = 1.0 / 6400.0) {
    Profile1D prof;
    prof.x0 = -0.25;
    prof.dx = dx;
    int n = static_cast<int>(std::lround(1.75 / prof.dx)) + 1;
    prof.c.assign(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        double x = prof.x_at(static_cast<size_t>(i));
        double edge = xstep((x - 0.05) / 0.35) * xstep((0.95 - x) / 0.35);
        prof.c[static_cast<size_t>(i)] = 1.0 + (value - 1.0) * edge;
    }
    return prof;
}

}  // namespace

TEST_CASE("travel time map on constant speeds") {
    // c = 1 everywhere: identity map
    Profile1D one;
    one.x0 = -0.25;
    one.dx = 1.0 / 200.0;
    one.c.assign(301, 1.0);
    TravelTimeMap m = travel_time_map(one);
    CHECK(m.y_of_x(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.y_of_x(0.73) == doctest::Approx(0.73).epsilon(1e-12));

    // plateau of 4 inside (0, 1): slope 2 in the flat part
    Profile1D four = constant_profile(4.0);
    TravelTimeMap m4 = travel_time_map(four);
    double y_half = m4.y_of_x(0.5);
    double y_half_plus = m4.y_of_x(0.6);
    CHECK((y_half_plus - y_half) == doctest::Approx(0.2).epsilon(1e-10));

    // inverse composes to the identity
    for (double x : {-0.1, 0.2, 0.5, 0.9, 1.2})
        CHECK(m4.x_of_y(m4.y_of_x(x)) == doctest::Approx(x).epsilon(1e-10));
}

TEST_CASE("piecewise two-plateau profile integrates to the quadrature value") {
    // 4 on (0, 1/2), 9 on (1/2, 1), smoothly blended
    Profile1D prof;
    prof.x0 = -0.25;
    prof.dx = 1.0 / 800.0;
    int n = static_cast<int>(std::lround(1.75 / prof.dx)) + 1;
    prof.c.assign(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        double x = prof.x_at(static_cast<size_t>(i));
        double e1 = sstep(x / 0.06) * sstep((1.0 - x) / 0.06);
        double lvl = 4.0 + 5.0 * sstep((x - 0.47) / 0.06);
        prof.c[static_cast<size_t>(i)] = 1.0 + (lvl - 1.0) * e1;
    }
    TravelTimeMap m = travel_time_map(prof);
    // direct quadrature of sqrt(c) is the oracle here
    double y1 = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        double xa = prof.x_at(static_cast<size_t>(i)), xb = prof.x_at(static_cast<size_t>(i + 1));
        if (xb <= 0.0 || xa >= 1.0) continue;
        y1 += 0.5 * prof.dx * (std::sqrt(prof.c[static_cast<size_t>(i)]) +
                               std::sqrt(prof.c[static_cast<size_t>(i + 1)]));
    }
    CHECK(m.y_of_x(1.0) == doctest::Approx(y1).epsilon(1e-6));
    // blend is narrow, so the nominal 2.5 is approached
    CHECK(m.y_of_x(1.0) == doctest::Approx(2.5).epsilon(0.03));
}

TEST_CASE("potential of a constant profile vanishes") {
    Profile1D one;
    one.x0 = -0.25;
    one.dx = 1.0 / 200.0;
    one.c.assign(401, 1.0);
    PotentialProfile p = potential_from_profile(one, 8e-3, 2.0);
    for (double v : p.p) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("potential vanishes beyond the travel-time image of the support") {
    Profile1D prof = bump_profile(15.0);
    TravelTimeMap m = travel_time_map(prof);
    PotentialProfile p = potential_from_profile(prof, 8e-3, m.y_of_x(1.0) + 1.0);
    double y_end = m.y_of_x(1.0);
    for (size_t i = 0; i < p.p.size(); ++i)
        if (p.y_at(i) > y_end + 0.05) CHECK(std::abs(p.p[i]) < 1e-8);
}

TEST_CASE("gaussian-like bump potential matches the symbolic formula") {
    // c(x) = 1 + (A-1) exp(-(x-1/2)^2 / w^2); closed-form chain rule gives
    // the exact potential through Q(X) = c^{-1/4}:
    //   Q_Y = Q_X / sqrt(c),  Q_YY = Q_XX / c - Q_X c' / (2 c^2)
    const double A = 6.0, w = 0.12;
    auto cf = [&](double x) { return 1.0 + (A - 1.0) * std::exp(-std::pow((x - 0.5) / w, 2)); };
    auto cpf = [&](double x) {
        return (A - 1.0) * std::exp(-std::pow((x - 0.5) / w, 2)) * (-2.0 * (x - 0.5) / (w * w));
    };
    auto cppf = [&](double x) {
        double e = std::exp(-std::pow((x - 0.5) / w, 2));
        return (A - 1.0) * e * (4.0 * std::pow((x - 0.5) / (w * w), 2) - 2.0 / (w * w));
    };

    Profile1D prof;
    prof.x0 = -0.25;
    prof.dx = 1.0 / 1600.0;
    int n = static_cast<int>(std::lround(1.75 / prof.dx)) + 1;
    prof.c.assign(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i)
        prof.c[static_cast<size_t>(i)] = cf(prof.x_at(static_cast<size_t>(i)));
    PotentialProfile p = potential_from_profile(prof, 2e-3, 2.2);
    TravelTimeMap m = travel_time_map(prof);

    for (double xq : {0.35, 0.45, 0.55, 0.65, 0.8}) {
        double c = cf(xq), cp = cpf(xq), cpp = cppf(xq);
        double q = std::pow(c, -0.25);
        double qx = -0.25 * std::pow(c, -1.25) * cp;
        double qxx = (5.0 / 16.0) * std::pow(c, -2.25) * cp * cp - 0.25 * std::pow(c, -1.25) * cpp;
        double qy = qx / std::sqrt(c);
        double qyy = qxx / c - qx * cp / (2.0 * c * c);
        double expected = qyy / q - 2.0 * std::pow(qy / q, 2);
        CHECK(p.value(m.y_of_x(xq)) == doctest::Approx(expected).epsilon(2e-3));
    }
}

TEST_CASE("profile recovery round trip") {
    // constant plateau 4: recovered plateau value within 1e-6 (fine grids;
    // the plateau is flat, so only amplitude error enters)
    Profile1D four = constant_profile(4.0, 1.0 / 25600.0);
    TravelTimeMap m4 = travel_time_map(four);
    PotentialProfile p4 = potential_from_profile(four, 2e-3, m4.y_of_x(1.4));
    Profile1D back4 = recover_profile(p4, four.x0, four.dx, static_cast<int>(four.c.size()));
    CHECK(back4.value(0.5) == doctest::Approx(4.0).epsilon(1e-6));

    // smooth bump with max 15 at the working grid step: sup-norm under 1e-3
    Profile1D prof = bump_profile(15.0);
    TravelTimeMap m = travel_time_map(prof);
    PotentialProfile p = potential_from_profile(prof, 8e-3, m.y_of_x(1.3) + 0.3);
    Profile1D back = recover_profile(p, prof.x0, prof.dx, static_cast<int>(prof.c.size()));
    double err = 0.0;
    for (size_t i = 0; i < prof.c.size(); ++i)
        err = std::max(err, std::abs(prof.c[i] - back.c[i]));
    CHECK(err < 1e-3);
}

TEST_CASE("trivial potential recovery") {
    PotentialProfile zero;
    zero.dy = 8e-3;
    zero.p.assign(300, 0.0);
    Profile1D c = recover_profile(zero, -0.1, 0.005, 300);
    for (double v : c.c) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary-data differentiation") {
    // linear g0, zero g1: q0 constant, q1 zero (exact on quadratics)
    BoundaryData1D g;
    g.dt = 0.01;
    int n = 200;
    g.g0.resize(static_cast<size_t>(n));
    g.g1.assign(static_cast<size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) g.g0[static_cast<size_t>(k)] = 3.0 + 2.0 * (0.01 * k);
    BvpData q = bvp_data_from_boundary(g, false);
    for (int k = 0; k < n; ++k) {
        CHECK(q.q0[static_cast<size_t>(k)] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(std::abs(q.q1[static_cast<size_t>(k)]) < 1e-8);
    }

    // g0 = tau^2, g1 = tau: q0 = 2 tau, q1 = 3
    for (int k = 0; k < n; ++k) {
        double tau = 0.01 * k;
        g.g0[static_cast<size_t>(k)] = tau * tau;
        g.g1[static_cast<size_t>(k)] = tau;
    }
    q = bvp_data_from_boundary(g, false);
    for (int k = 0; k < n; ++k) {
        CHECK(q.q0[static_cast<size_t>(k)] ==
              doctest::Approx(2.0 * 0.01 * k).epsilon(1e-8).scale(1.0));
        CHECK(q.q1[static_cast<size_t>(k)] == doctest::Approx(3.0).epsilon(1e-8));
    }

    // mirrored data g1 = g0' gives q1 = 2 g0''
    for (int k = 0; k < n; ++k) {
        double tau = 0.01 * k;
        g.g0[static_cast<size_t>(k)] = std::sin(tau);
        g.g1[static_cast<size_t>(k)] = std::cos(tau);
    }
    q = bvp_data_from_boundary(g, false);
    for (int k = 5; k < n - 5; ++k)
        CHECK(q.q1[static_cast<size_t>(k)] ==
              doctest::Approx(-2.0 * std::sin(0.01 * k)).epsilon(1e-3).scale(1.0));

    BoundaryData1D tiny;
    tiny.dt = 0.1;
    tiny.g0 = {1.0, 2.0};
    tiny.g1 = {0.0, 0.0};
    CHECK_THROWS_AS(bvp_data_from_boundary(tiny, false), SolverError);
}

TEST_CASE("potential from a solution grid") {
    // V independent of Y: p = 0; V = Y: p = 4
    GridFunction2D V(50, 40, 0.02, 0.02);
    for (int it = 0; it < V.nt; ++it)
        for (int iy = 0; iy < V.ny; ++iy) V.at(iy, it) = 7.0;
    PotentialProfile p = potential_from_solution(V);
    for (double v : p.p) CHECK(std::abs(v) < 1e-10);

    for (int it = 0; it < V.nt; ++it)
        for (int iy = 0; iy < V.ny; ++iy) V.at(iy, it) = V.y(iy);
    p = potential_from_solution(V);
    for (double v : p.p) CHECK(v == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("nonlocal solution from the travel-time solve satisfies the PDE") {
    // residual of the shifted-and-differentiated field decreases under
    // refinement
    Profile1D prof = bump_profile(4.0, 0.38);
    TravelTimeMap m = travel_time_map(prof);
    double span = m.y_of_x(1.2);

    auto residual_norm = [&](double dtau, int ny, int nt, double dy) {
        PotentialProfile pot = potential_from_profile(prof, dy, span);
        double t_need = dy * (ny - 1) + dtau * (nt - 1) + 1.0;
        RemainderField f = solve_remainder(pot, t_need, dy, dy);
        GridFunction2D V = solution_from_remainder(f, ny, nt, dy, dtau);
        SolverOptions opts;
        opts.lambda = 1.05;
        opts.alpha = 0.49;
        ConvexCostFunctional fun(ny, nt, dy, dtau, opts);
        GridFunction2D S = fun.residual(V);
        // interior norm away from the data edge: the first rows carry the
        // one-sided closure of the characteristic kink and converge slower
        double acc = 0.0;
        int cnt = 0;
        for (int it = 0; it < nt; ++it)
            for (int iy = 0; iy < ny; ++iy) {
                if (dy * iy < 0.06 || dy * iy > dy * (ny - 1) - 0.06) continue;
                if (dtau * it < 0.14 || dtau * it > dtau * (nt - 1) - 0.06) continue;
                acc += S.at(iy, it) * S.at(iy, it);
                ++cnt;
            }
        return std::sqrt(acc / cnt);
    };

    double coarse = residual_norm(0.02, 80, 120, 0.02);
    double mid = residual_norm(0.01, 160, 240, 0.01);
    double fine = residual_norm(0.005, 320, 480, 0.005);
    CHECK(mid < coarse);
    CHECK(fine < mid);
    CHECK(fine < 0.45 * coarse);
}
