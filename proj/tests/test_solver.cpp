#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sarcvx/solver.hpp"
#include "sarcvx/transform.hpp"
#include "support.hpp"

using namespace sarcvx;
using namespace sarcvx::testing;

namespace {

SolverOptions small_opts() {
    SolverOptions o;
    o.lambda = 1.05;
    o.alpha = 0.49;
    o.gamma = 1e-10;
    return o;
}

// expansion of a free-block direction into a constraint-compatible full-grid
// direction (homogeneous boundary data)
GridFunction2D expand_direction(const GridFunction2D& free_part, int neumann_order) {
    GridFunction2D h = free_part;
    for (int it = 0; it < h.nt; ++it) {
        h.at(0, it) = 0.0;
        h.at(1, it) = neumann_order == 2 ? 0.25 * h.at(2, it) : 0.0;
        h.at(h.ny - 1, it) = (4.0 * h.at(h.ny - 2, it) - h.at(h.ny - 3, it)) / 3.0;
    }
    return h;
}

GridFunction2D random_smooth(std::mt19937_64& rng, int ny, int nt, double dy, double dtau) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    GridFunction2D g(ny, nt, dy, dtau);
    double b = dy * (ny - 1), T = dtau * (nt - 1);
    for (int q = 0; q < 6; ++q) {
        double ay = uni(rng), at = uni(rng), amp = uni(rng);
        for (int it = 0; it < nt; ++it)
            for (int iy = 0; iy < ny; ++iy)
                g.at(iy, it) += amp * std::sin((q + 1) * M_PI * (dy * iy) / b + ay) *
                                std::cos(q * M_PI * (dtau * it) / T + at);
    }
    return g;
}

}  // namespace

TEST_CASE("residual on simple fields") {
    ConvexCostFunctional fun(40, 50, 0.05, 0.04, small_opts());
    GridFunction2D V = fun.make_grid();

    // constant field: all derivative terms vanish
    for (auto& v : V.v) v = 3.0;
    GridFunction2D S = fun.residual(V);
    for (double s : S.v) CHECK(std::abs(s) < 1e-9);

    // V = Y^2: S = 2 + 8 Y^3 exactly (stencils exact on quadratics)
    for (int it = 0; it < V.nt; ++it)
        for (int iy = 0; iy < V.ny; ++iy) V.at(iy, it) = V.y(iy) * V.y(iy);
    S = fun.residual(V);
    for (int it = 0; it < V.nt; ++it)
        for (int iy = 0; iy < V.ny; ++iy) {
            double y = V.y(iy);
            CHECK(S.at(iy, it) == doctest::Approx(2.0 + 8.0 * y * y * y).epsilon(1e-8));
        }
}

TEST_CASE("cost on trivial fields") {
    SolverOptions o = small_opts();
    o.gamma = 1e-4;
    int ny = 30, nt = 40;
    double dy = 0.03, dtau = 0.05;
    ConvexCostFunctional fun(ny, nt, dy, dtau, o);
    GridFunction2D V = fun.make_grid();
    CHECK(fun.cost(V) == doctest::Approx(0.0));

    // constant one: only the zeroth-order norm term survives, J = gamma*area
    for (auto& v : V.v) v = 1.0;
    double area = dy * (ny - 1) * dtau * (nt - 1);
    CHECK(fun.cost(V) == doctest::Approx(o.gamma * area).epsilon(1e-9));
    CHECK(fun.cost(V) >= 0.0);
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(7);
    int ny = 24, nt = 30;
    double dy = 0.05, dtau = 0.06;
    for (int neumann : {1, 2}) {
        SolverOptions o = small_opts();
        o.neumann_order = neumann;
        o.gamma = 1e-6;
        ConvexCostFunctional fun(ny, nt, dy, dtau, o);
        BoundaryConstraint bc;
        bc.neumann_order = neumann;
        bc.q0.assign(static_cast<size_t>(nt), 0.0);
        bc.q1.assign(static_cast<size_t>(nt), 0.0);
        for (int it = 0; it < nt; ++it) {
            bc.q0[static_cast<size_t>(it)] = 0.3 * std::sin(0.2 * it);
            bc.q1[static_cast<size_t>(it)] = 0.1 * std::cos(0.15 * it);
        }
        for (int trial = 0; trial < 8; ++trial) {
            GridFunction2D V = random_smooth(rng, ny, nt, dy, dtau);
            fun.apply_constraints(V, bc);
            GridFunction2D h = expand_direction(random_smooth(rng, ny, nt, dy, dtau), neumann);
            GridFunction2D G = fun.gradient(V, bc);
            double eps = 1e-5;
            GridFunction2D Vp = V, Vm = V;
            for (size_t k = 0; k < V.v.size(); ++k) {
                Vp.v[k] += eps * h.v[k];
                Vm.v[k] -= eps * h.v[k];
            }
            double fd = (fun.cost(Vp) - fun.cost(Vm)) / (2.0 * eps);
            double an = grid_dot(G, h);
            CHECK(an == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("gradient of the H4-regularized cost also matches finite differences") {
    std::mt19937_64 rng(11);
    int ny = 16, nt = 18;
    SolverOptions o = small_opts();
    o.reg_norm = RegNorm::H4;
    o.gamma = 1e-5;
    ConvexCostFunctional fun(ny, nt, 0.07, 0.06, o);
    BoundaryConstraint bc;
    bc.q0.assign(18, 0.1);
    bc.q1.assign(18, -0.05);
    GridFunction2D V = random_smooth(rng, ny, nt, 0.07, 0.06);
    fun.apply_constraints(V, bc);
    GridFunction2D h = expand_direction(random_smooth(rng, ny, nt, 0.07, 0.06), 2);
    GridFunction2D G = fun.gradient(V, bc);
    double eps = 1e-5;
    GridFunction2D Vp = V, Vm = V;
    for (size_t k = 0; k < V.v.size(); ++k) {
        Vp.v[k] += eps * h.v[k];
        Vm.v[k] -= eps * h.v[k];
    }
    double fd = (fun.cost(Vp) - fun.cost(Vm)) / (2.0 * eps);
    CHECK(grid_dot(G, h) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("extension honors all three boundary conditions") {
    int ny = 40, nt = 25;
    double dy = 0.1, dtau = 0.2;
    SolverOptions o = small_opts();
    ConvexCostFunctional fun(ny, nt, dy, dtau, o);
    BoundaryConstraint bc;
    bc.q0.resize(static_cast<size_t>(nt));
    bc.q1.resize(static_cast<size_t>(nt));
    for (int it = 0; it < nt; ++it) {
        bc.q0[static_cast<size_t>(it)] = std::sin(0.3 * it);
        bc.q1[static_cast<size_t>(it)] = 0.5 * std::cos(0.2 * it);
    }
    GridFunction2D V = fun.extension(bc);
    for (int it = 0; it < nt; ++it) {
        CHECK(V.at(0, it) == doctest::Approx(bc.q0[static_cast<size_t>(it)]));
        // discrete one-sided traces reproduce the data exactly
        double vy0 = (-3.0 * V.at(0, it) + 4.0 * V.at(1, it) - V.at(2, it)) / (2.0 * dy);
        CHECK(vy0 == doctest::Approx(bc.q1[static_cast<size_t>(it)]).epsilon(1e-12));
        double vyb =
            (3.0 * V.at(ny - 1, it) - 4.0 * V.at(ny - 2, it) + V.at(ny - 3, it)) / (2.0 * dy);
        CHECK(std::abs(vyb) < 1e-12);
    }
}

TEST_CASE("carleman weight is monotone and bounded") {
    CarlemanWeight w{1.05, 0.49};
    CHECK(w(0.0, 0.0) == doctest::Approx(1.0));
    double prev = 2.0;
    for (double y : {0.0, 0.5, 1.0, 2.0}) {
        double v = w(y, 0.3);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(w(0.2, 0.1) >= w(0.2, 0.4));
    CHECK(w(0.2, 0.1) >= w(0.5, 0.1));
}

TEST_CASE("energy certificate on trivial and random fields") {
    int ny = 60, nt = 80;
    double dy = 0.05, dtau = 0.05;
    ConvexCostFunctional fun(ny, nt, dy, dtau, small_opts());

    GridFunction2D zero = fun.make_grid();
    CarlemanReport rep = fun.carleman_certificate(zero, 3.0);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.interior == 0.0);

    std::mt19937_64 rng(3);
    double cmin = 1e300;
    for (int q = 0; q < 10; ++q) {
        GridFunction2D u = random_h02_sample(rng, ny, nt, dy, dtau);
        for (double lambda : {2.0, 3.0, 4.0, 6.0}) {
            CarlemanReport r = fun.carleman_certificate(u, lambda);
            if (std::isfinite(r.constant)) cmin = std::min(cmin, r.constant);
            CHECK(r.constant > 0.0);
        }
    }
    CHECK(cmin > 0.0);

    // fields violating the trace conditions are rejected
    GridFunction2D bad = fun.make_grid();
    for (int it = 0; it < nt; ++it) bad.at(0, it) = 1.0;
    CHECK_THROWS_AS(fun.carleman_certificate(bad, 3.0), SolverError);
}

TEST_CASE("convexity gap on identical and random pairs") {
    int ny = 40, nt = 50;
    double dy = 0.06, dtau = 0.07;
    SolverOptions o = small_opts();
    ConvexCostFunctional fun(ny, nt, dy, dtau, o);
    BoundaryConstraint bc;
    bc.q0.assign(static_cast<size_t>(nt), 0.0);
    bc.q1.assign(static_cast<size_t>(nt), 0.0);
    for (int it = 0; it < nt; ++it) bc.q0[static_cast<size_t>(it)] = 0.2 * std::sin(0.25 * it);

    GridFunction2D base = fun.extension(bc);
    CHECK(fun.convexity_gap(base, base, bc) == doctest::Approx(0.0));

    std::mt19937_64 rng(17);
    for (int q = 0; q < 20; ++q) {
        GridFunction2D u1 = random_h02_sample(rng, ny, nt, dy, dtau);
        GridFunction2D u2 = random_h02_sample(rng, ny, nt, dy, dtau);
        GridFunction2D V1 = base, V2 = base;
        for (size_t k = 0; k < V1.v.size(); ++k) {
            V1.v[k] += 0.8 * u1.v[k];
            V2.v[k] += 0.8 * u2.v[k];
        }
        double gap = fun.convexity_gap(V1, V2, bc);
        CHECK(gap >= -1e-12);
    }
}

TEST_CASE("gamma scaling of the convexity gap") {
    int ny = 30, nt = 36;
    double dy = 0.07, dtau = 0.08;
    BoundaryConstraint bc;
    bc.q0.assign(36, 0.0);
    bc.q1.assign(36, 0.0);
    std::mt19937_64 rng(23);
    GridFunction2D u1 = random_h02_sample(rng, ny, nt, dy, dtau);
    GridFunction2D u2 = random_h02_sample(rng, ny, nt, dy, dtau);

    auto gap_at = [&](double gamma) {
        SolverOptions o = small_opts();
        o.gamma = gamma;
        ConvexCostFunctional fun(ny, nt, dy, dtau, o);
        GridFunction2D V1 = fun.extension(bc), V2 = V1;
        for (size_t k = 0; k < V1.v.size(); ++k) {
            V1.v[k] += u1.v[k];
            V2.v[k] += u2.v[k];
        }
        return fun.convexity_gap(V1, V2, bc);
    };
    // the gamma/2 |V2-V1|^2 term enters linearly, so the gap grows with gamma
    double g1 = gap_at(1e-6), g2 = gap_at(1e-3), g3 = gap_at(1e-2);
    CHECK(g2 > g1);
    CHECK(g3 > g2);
    CHECK((g3 - g2) / (g2 - g1) == doctest::Approx((1e-2 - 1e-3) / (1e-3 - 1e-6)).epsilon(0.05));
}

TEST_CASE("minimize on zero data stays at zero") {
    SolverOptions o = small_opts();
    ConvexCostFunctional fun(30, 40, 0.05, 0.05, o);
    BoundaryConstraint bc;
    bc.q0.assign(40, 0.0);
    bc.q1.assign(40, 0.0);
    DescentState st = fun.minimize(bc);
    CHECK(st.stop_reason == "gradient_tolerance");
    CHECK(st.cost == doctest::Approx(0.0));
    for (double v : st.V.v) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("minimize descends monotonically and keeps the boundary data") {
    // small synthetic problem
    Profile1D prof = bump_profile(6.0, 0.28);
    double b = 3.0, t_tilde = 12.0, h = 0.04;
    int ny = static_cast<int>(std::lround(b / h)) + 1;
    int nt = static_cast<int>(std::lround(t_tilde / h)) + 1;
    SyntheticProblem syn = make_synthetic(prof, t_tilde, h, h, b);

    SolverOptions o = small_opts();
    o.max_iters = 120;
    o.stall_window = 0;
    ConvexCostFunctional fun(ny, nt, h, h, o);
    BoundaryConstraint bc{syn.q.q0, syn.q.q1, 2};
    DescentState st = fun.minimize(bc);

    for (size_t i = 1; i < st.cost_history.size(); ++i)
        CHECK(st.cost_history[i] <= st.cost_history[i - 1] * (1.0 + 1e-12));
    for (int it = 0; it < nt; ++it) {
        CHECK(st.V.at(0, it) == doctest::Approx(bc.q0[static_cast<size_t>(it)]));
        double vy0 =
            (-3.0 * st.V.at(0, it) + 4.0 * st.V.at(1, it) - st.V.at(2, it)) / (2.0 * h);
        CHECK(vy0 == doctest::Approx(bc.q1[static_cast<size_t>(it)]).epsilon(1e-9).scale(1.0));
        double vyb = (3.0 * st.V.at(ny - 1, it) - 4.0 * st.V.at(ny - 2, it) +
                      st.V.at(ny - 3, it)) / (2.0 * h);
        CHECK(std::abs(vyb) < 1e-12);
    }
    CHECK(st.cost < st.cost_history.front());
}
