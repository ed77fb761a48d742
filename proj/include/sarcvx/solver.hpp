#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sarcvx/config.hpp"
#include "sarcvx/grid2d.hpp"

namespace sarcvx {

// Exponential weight exp(-2*lambda*(Y + alpha*tau)); decreasing in both
// variables, equal to 1 at the origin.
struct CarlemanWeight {
    double lambda = 1.05;
    double alpha = 0.49;
    double operator()(double y, double tau) const {
        return std::exp(-2.0 * lambda * (y + alpha * tau));
    }
};

// Boundary data of the nonlocal problem: V(0, tau) = q0, V_Y(0, tau) = q1,
// V_Y(b, tau) = 0. The Neumann trace at Y = 0 is imposed through the second
// grid column, to first or second order.
struct BoundaryConstraint {
    std::vector<double> q0;
    std::vector<double> q1;
    int neumann_order = 2;
};

struct SolverOptions {
    double lambda = 1.05;
    double alpha = 0.49;
    double gamma = 1e-10;
    RegNorm reg_norm = RegNorm::H2;
    GradientMetric metric = GradientMetric::Smoothed;
    int neumann_order = 2;
    double step = 0.1;
    int max_iters = 10000;
    double grad_tol = 1e-8;          // stop when |grad| < grad_tol * (1 + |J|)
    double ball_radius_max = 1e6;    // abort when the H2 norm of an iterate passes this
    int stall_window = 50;           // stop when J stops improving over this many steps
    double stall_rel = 1e-9;
    double seed_decay = 0.5;         // range of the Neumann part of the start; 0 = whole span
    std::string trace_path;          // optional per-iteration CSV
    const GridFunction2D* track_reference = nullptr;  // record H2 distance to this
};

struct DescentState {
    GridFunction2D V;
    int iterations = 0;
    double cost = 0.0;
    double grad_norm = 0.0;
    double final_step = 0.0;
    std::string stop_reason;
    std::vector<double> cost_history;
    std::vector<double> grad_norm_history;
    std::vector<double> distance_history;  // vs track_reference when given
};

struct CarlemanReport {
    double lhs = 0.0;       // weighted energy of the principal part
    double interior = 0.0;  // weighted lower-order interior terms
    double initial = 0.0;   // tau = 0 trace terms
    double terminal = 0.0;  // tau = T trace terms (subtracted side)
    double constant = 0.0;  // largest admissible C; +inf when the rhs is nonpositive
};

// Weighted least-squares functional for the nonlocal problem on the
// rectangle (0,b) x (0,T): residual S(V) = V_YY - 2 V_Ytau + 4 V_Y(.,0) V,
// cost J = int S^2 * weight + gamma * |V|^2 in the discrete Sobolev norm.
// All derivatives are second-order centered stencils with one-sided closures.
class ConvexCostFunctional {
  public:
    ConvexCostFunctional(int ny, int nt, double dy, double dtau, SolverOptions opts);
    ~ConvexCostFunctional();

    int ny() const;
    int nt() const;
    const SolverOptions& options() const;

    GridFunction2D make_grid() const;

    // S(V) on the full grid.
    GridFunction2D residual(const GridFunction2D& V) const;

    // Discrete cost J(V); no constraint is assumed.
    double cost(const GridFunction2D& V) const;

    // Exact gradient of the discrete cost with respect to the free grid
    // values: boundary-constrained entries are zeroed and contributions of
    // the dependent columns are folded into their parent columns.
    GridFunction2D gradient(const GridFunction2D& V, const BoundaryConstraint& bc) const;

    double cost_and_gradient(const GridFunction2D& V, const BoundaryConstraint& bc,
                             GridFunction2D& grad) const;

    // Discrete Sobolev norms uses the same stencils as the cost.
    double h2_norm(const GridFunction2D& V) const;
    double reg_norm_value(const GridFunction2D& V) const;  // per options().reg_norm

    // Restriction of the H2 error norm to the triangle Y + alpha*tau <
    // 2*alpha*b - mu, the region the accuracy estimate lives on.
    double h2_norm_triangle(const GridFunction2D& V, double mu) const;

    // Extension of the boundary data into the rectangle:
    // V0 = q0(tau) + q1(tau) * Y * (1 - Y/b)^2.
    GridFunction2D extension(const BoundaryConstraint& bc) const;

    // Overwrites the fixed and dependent columns from the constraint.
    void apply_constraints(GridFunction2D& V, const BoundaryConstraint& bc) const;

    // Checks u(0,.) = u_Y(0,.) = u_Y(b,.) = 0 within tol * max|u|, then
    // evaluates both sides of the weighted energy inequality.
    CarlemanReport carleman_certificate(const GridFunction2D& u, double lambda,
                                        double membership_tol = 5e-3) const;

    // Bregman gap J(V2) - J(V1) - <J'(V1), V2-V1> - gamma/2 |V2-V1|_H2^2;
    // nonnegative on boundary-compatible pairs inside the working ball.
    double convexity_gap(const GridFunction2D& V1, const GridFunction2D& V2,
                         const BoundaryConstraint& bc) const;

    // Gradient descent with a fixed step, halved when a step fails to
    // decrease J; throws SolverError when the step underflows or an iterate
    // leaves the configured ball.
    DescentState minimize(const BoundaryConstraint& bc) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double grid_dot(const GridFunction2D& a, const GridFunction2D& b);

}  // namespace sarcvx
