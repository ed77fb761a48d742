#include "sarcvx/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace sarcvx {

namespace {

// ---- 1D second-order stencils and their exact transposes ------------------
// All operators act on contiguous vectors; the 2D wrappers below map them
// over rows and columns of the grid.

void d1_line(const double* f, double* out, int n, double h) {
    const double s = 1.0 / (2.0 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * s;
    for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * s;
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * s;
}

void d1_line_adj(const double* g, double* out, int n, double h) {
    const double s = 1.0 / (2.0 * h);
    std::fill(out, out + n, 0.0);
    out[0] += -3.0 * s * g[0];
    out[1] += 4.0 * s * g[0];
    out[2] += -s * g[0];
    for (int i = 1; i + 1 < n; ++i) {
        out[i + 1] += s * g[i];
        out[i - 1] += -s * g[i];
    }
    out[n - 1] += 3.0 * s * g[n - 1];
    out[n - 2] += -4.0 * s * g[n - 1];
    out[n - 3] += s * g[n - 1];
}

void d2_line(const double* f, double* out, int n, double h) {
    const double s = 1.0 / (h * h);
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * s;
    for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * s;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * s;
}

void d2_line_adj(const double* g, double* out, int n, double h) {
    const double s = 1.0 / (h * h);
    std::fill(out, out + n, 0.0);
    out[0] += 2.0 * s * g[0];
    out[1] += -5.0 * s * g[0];
    out[2] += 4.0 * s * g[0];
    out[3] += -s * g[0];
    for (int i = 1; i + 1 < n; ++i) {
        out[i + 1] += s * g[i];
        out[i] += -2.0 * s * g[i];
        out[i - 1] += s * g[i];
    }
    out[n - 1] += 2.0 * s * g[n - 1];
    out[n - 2] += -5.0 * s * g[n - 1];
    out[n - 3] += 4.0 * s * g[n - 1];
    out[n - 4] += -s * g[n - 1];
}

// ---- symmetric pentadiagonal Cholesky --------------------------------------

struct BandedSpd {
    int n = 0;
    // band[d][j] holds A[j+d][j], d = 0..2; after factor() the lower factor L.
    std::vector<double> b0, b1, b2;

    void factor() {
        for (int j = 0; j < n; ++j) {
            double d = b0[j];
            if (j >= 1) d -= b1[j - 1] * b1[j - 1];
            if (j >= 2) d -= b2[j - 2] * b2[j - 2];
            if (!(d > 0.0)) throw SolverError("metric factorization lost positivity");
            b0[j] = std::sqrt(d);
            if (j + 1 < n) {
                double v = b1[j];
                if (j >= 1) v -= b1[j - 1] * b2[j - 1];
                b1[j] = v / b0[j];
            }
            if (j + 2 < n) b2[j] = b2[j] / b0[j];
        }
    }

    // solves L L^T x = rhs in place
    void solve(double* x) const {
        for (int i = 0; i < n; ++i) {
            double v = x[i];
            if (i >= 1) v -= b1[i - 1] * x[i - 1];
            if (i >= 2) v -= b2[i - 2] * x[i - 2];
            x[i] = v / b0[i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double v = x[i];
            if (i + 1 < n) v -= b1[i] * x[i + 1];
            if (i + 2 < n) v -= b2[i] * x[i + 2];
            x[i] = v / b0[i];
        }
    }
};

// A = I + T + T^2 with T the natural second-difference stiffness matrix.
BandedSpd smoothing_matrix(int n, double h) {
    const double s = 1.0 / (h * h);
    std::vector<double> t0(static_cast<size_t>(n), 2.0 * s);
    t0.front() = s;
    t0.back() = s;
    const double t1 = -s;
    BandedSpd A;
    A.n = n;
    A.b0.assign(static_cast<size_t>(n), 0.0);
    A.b1.assign(static_cast<size_t>(n), 0.0);
    A.b2.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double sq = t0[i] * t0[i];
        if (i >= 1) sq += t1 * t1;
        if (i + 1 < n) sq += t1 * t1;
        A.b0[i] = 1.0 + t0[i] + sq;
        if (i + 1 < n) A.b1[i] = t1 + t1 * (t0[i] + t0[i + 1]);
        if (i + 2 < n) A.b2[i] = t1 * t1;
    }
    A.factor();
    return A;
}

enum class Op { Y1, Y2, T1, T2 };

}  // namespace

struct ConvexCostFunctional::Impl {
    int ny, nt;
    double dy, dtau;
    SolverOptions opts;

    std::vector<double> wq;   // trapezoid weights
    std::vector<double> psi;  // carleman weight
    std::vector<std::vector<Op>> reg_chains;

    BandedSpd metric_y;  // on the free columns [2, ny-2]
    BandedSpd metric_t;

    // rank-ny augmentation of the metric that carries the stiff coupling of
    // the coefficient row (see build_row0_metric)
    mutable bool row0_metric = false;
    mutable std::vector<double> k_fact;    // dense Cholesky factor, nyf x nyf
    mutable std::vector<double> atau_e0;   // A_tau^{-1} e0
    mutable std::vector<double> ay_scratch;

    mutable std::vector<double> sc1, sc2, sc3, sc4, row_a, row_b, col_a;

    Impl(int ny_, int nt_, double dy_, double dtau_, SolverOptions o)
        : ny(ny_), nt(nt_), dy(dy_), dtau(dtau_), opts(std::move(o)) {
        if (ny < 7 || nt < 7) throw SolverError("solver grid must be at least 7x7");
        size_t sz = static_cast<size_t>(ny) * nt;
        wq.resize(sz);
        psi.resize(sz);
        for (int it = 0; it < nt; ++it) {
            double ct = (it == 0 || it == nt - 1) ? 0.5 : 1.0;
            for (int iy = 0; iy < ny; ++iy) {
                double cy = (iy == 0 || iy == ny - 1) ? 0.5 : 1.0;
                wq[idx(iy, it)] = dy * dtau * cy * ct;
                psi[idx(iy, it)] =
                    std::exp(-2.0 * opts.lambda * (dy * iy + opts.alpha * dtau * it));
            }
        }
        reg_chains = {{}, {Op::Y1}, {Op::T1}, {Op::Y2}, {Op::Y1, Op::T1}, {Op::T2}};
        if (opts.reg_norm == RegNorm::H4) {
            std::vector<std::vector<Op>> extra = {
                {Op::Y2, Op::Y1},         {Op::Y2, Op::T1},
                {Op::Y1, Op::T2},         {Op::T2, Op::T1},
                {Op::Y2, Op::Y2},         {Op::Y2, Op::Y1, Op::T1},
                {Op::Y2, Op::T2},         {Op::Y1, Op::T2, Op::T1},
                {Op::T2, Op::T2}};
            reg_chains.insert(reg_chains.end(), extra.begin(), extra.end());
        }
        if (opts.metric == GradientMetric::Smoothed) {
            metric_y = smoothing_matrix(ny - 3, dy);
            metric_t = smoothing_matrix(nt, dtau);
        }
        sc1.resize(sz);
        sc2.resize(sz);
        sc3.resize(sz);
        sc4.resize(sz);
        row_a.resize(static_cast<size_t>(ny));
        row_b.resize(static_cast<size_t>(ny));
        col_a.resize(static_cast<size_t>(nt));
    }

    size_t idx(int iy, int it) const { return static_cast<size_t>(it) * ny + iy; }

    // ---- 2D operator wrappers ----------------------------------------------

    void apply_y(const double* in, double* out, bool second) const {
        for (int it = 0; it < nt; ++it) {
            const double* f = in + static_cast<size_t>(it) * ny;
            double* o = out + static_cast<size_t>(it) * ny;
            second ? d2_line(f, o, ny, dy) : d1_line(f, o, ny, dy);
        }
    }

    void apply_y_adj(const double* in, double* out, bool second) const {
        for (int it = 0; it < nt; ++it) {
            const double* f = in + static_cast<size_t>(it) * ny;
            double* o = out + static_cast<size_t>(it) * ny;
            second ? d2_line_adj(f, o, ny, dy) : d1_line_adj(f, o, ny, dy);
        }
    }

    void apply_t(const double* in, double* out, bool second) const {
        std::vector<double>& fcol = col_a;
        std::vector<double> ocol(static_cast<size_t>(nt));
        for (int iy = 0; iy < ny; ++iy) {
            for (int it = 0; it < nt; ++it) fcol[it] = in[idx(iy, it)];
            second ? d2_line(fcol.data(), ocol.data(), nt, dtau)
                   : d1_line(fcol.data(), ocol.data(), nt, dtau);
            for (int it = 0; it < nt; ++it) out[idx(iy, it)] = ocol[it];
        }
    }

    void apply_t_adj(const double* in, double* out, bool second) const {
        std::vector<double>& fcol = col_a;
        std::vector<double> ocol(static_cast<size_t>(nt));
        for (int iy = 0; iy < ny; ++iy) {
            for (int it = 0; it < nt; ++it) fcol[it] = in[idx(iy, it)];
            second ? d2_line_adj(fcol.data(), ocol.data(), nt, dtau)
                   : d1_line_adj(fcol.data(), ocol.data(), nt, dtau);
            for (int it = 0; it < nt; ++it) out[idx(iy, it)] = ocol[it];
        }
    }

    void apply_op(Op op, const double* in, double* out) const {
        switch (op) {
            case Op::Y1: apply_y(in, out, false); break;
            case Op::Y2: apply_y(in, out, true); break;
            case Op::T1: apply_t(in, out, false); break;
            case Op::T2: apply_t(in, out, true); break;
        }
    }

    void apply_op_adj(Op op, const double* in, double* out) const {
        switch (op) {
            case Op::Y1: apply_y_adj(in, out, false); break;
            case Op::Y2: apply_y_adj(in, out, true); break;
            case Op::T1: apply_t_adj(in, out, false); break;
            case Op::T2: apply_t_adj(in, out, true); break;
        }
    }

    // chain applied left to right; result lands in sc2 (sc1 scratch)
    const double* apply_chain(const std::vector<Op>& chain, const double* in) const {
        if (chain.empty()) return in;
        const double* src = in;
        double* dst = sc1.data();
        double* alt = sc2.data();
        for (const Op op : chain) {
            apply_op(op, src, dst);
            src = dst;
            std::swap(dst, alt);
        }
        return src;
    }

    // ---- residual and cost --------------------------------------------------

    // derivative of the first row in Y
    void row0_dy(const GridFunction2D& V, std::vector<double>& r) const {
        r.resize(static_cast<size_t>(ny));
        d1_line(V.v.data(), r.data(), ny, dy);
    }

    void residual_into(const GridFunction2D& V, GridFunction2D& S) const {
        // sc3 = V_Y, sc4 = (V_Y)_tau
        apply_y(V.v.data(), sc3.data(), false);
        apply_t(sc3.data(), sc4.data(), false);
        apply_y(V.v.data(), S.v.data(), true);
        std::vector<double>& r = row_a;
        for (int iy = 0; iy < ny; ++iy) r[iy] = sc3[idx(iy, 0)];
        for (int it = 0; it < nt; ++it)
            for (int iy = 0; iy < ny; ++iy) {
                size_t k = idx(iy, it);
                S.v[k] += -2.0 * sc4[k] + 4.0 * r[iy] * V.v[k];
            }
    }

    double cost_value(const GridFunction2D& V, GridFunction2D* S_out) const {
        GridFunction2D S(ny, nt, dy, dtau);
        residual_into(V, S);
        double jr = 0.0;
        for (size_t k = 0; k < S.v.size(); ++k) jr += wq[k] * psi[k] * S.v[k] * S.v[k];
        double jreg = 0.0;
        for (const auto& chain : reg_chains) {
            const double* d = apply_chain(chain, V.v.data());
            double acc = 0.0;
            for (size_t k = 0; k < wq.size(); ++k) acc += wq[k] * d[k] * d[k];
            jreg += acc;
        }
        if (S_out) *S_out = std::move(S);
        return jr + opts.gamma * jreg;
    }

    void fold_constraints(GridFunction2D& G, const BoundaryConstraint& bc) const {
        // dependent last column: V[ny-1] = (4 V[ny-2] - V[ny-3]) / 3
        for (int it = 0; it < nt; ++it) {
            double g = G.at(ny - 1, it);
            G.at(ny - 2, it) += 4.0 / 3.0 * g;
            G.at(ny - 3, it) -= 1.0 / 3.0 * g;
            G.at(ny - 1, it) = 0.0;
            if (bc.neumann_order == 2) {
                // dependent second column: V[1] = (2 dy q1 + 3 V[0] + V[2]) / 4
                G.at(2, it) += 0.25 * G.at(1, it);
            }
            G.at(1, it) = 0.0;
            G.at(0, it) = 0.0;
        }
    }

    double gradient_into(const GridFunction2D& V, const BoundaryConstraint& bc,
                         GridFunction2D& G) const {
        GridFunction2D S(ny, nt, dy, dtau);
        double J = cost_value(V, &S);

        // T2 = 2 w psi S
        std::vector<double>& t2 = sc3;
        for (size_t k = 0; k < S.v.size(); ++k) t2[k] = 2.0 * wq[k] * psi[k] * S.v[k];

        std::fill(G.v.begin(), G.v.end(), 0.0);
        // d2y^T
        apply_y_adj(t2.data(), sc4.data(), true);
        for (size_t k = 0; k < G.v.size(); ++k) G.v[k] += sc4[k];
        // -2 (d1t d1y)^T = -2 d1y^T d1t^T
        apply_t_adj(t2.data(), sc4.data(), false);
        apply_y_adj(sc4.data(), sc1.data(), false);
        for (size_t k = 0; k < G.v.size(); ++k) G.v[k] += -2.0 * sc1[k];
        // + 4 r .* T2  (direct V dependence of the zeroth-order term)
        std::vector<double>& r = row_a;
        row0_dy(V, r);
        for (int it = 0; it < nt; ++it)
            for (int iy = 0; iy < ny; ++iy) G.v[idx(iy, it)] += 4.0 * r[iy] * t2[idx(iy, it)];
        // + 4 * embed_row0(d1^T s), s_j = sum_t V(j,t) T2(j,t)
        std::vector<double>& s = row_a;
        std::fill(s.begin(), s.end(), 0.0);
        for (int it = 0; it < nt; ++it)
            for (int iy = 0; iy < ny; ++iy) s[iy] += V.v[idx(iy, it)] * t2[idx(iy, it)];
        std::vector<double>& srow = row_b;
        d1_line_adj(s.data(), srow.data(), ny, dy);
        for (int iy = 0; iy < ny; ++iy) G.v[idx(iy, 0)] += 4.0 * srow[iy];

        // regularization: gamma * 2 chain^T (w .* chain V)
        for (const auto& chain : reg_chains) {
            const double* d = apply_chain(chain, V.v.data());
            std::vector<double> acc(d, d + wq.size());
            for (size_t k = 0; k < wq.size(); ++k) acc[k] *= wq[k];
            // reverse chain of adjoints
            for (auto op = chain.rbegin(); op != chain.rend(); ++op) {
                apply_op_adj(*op, acc.data(), sc4.data());
                std::copy(sc4.begin(), sc4.end(), acc.begin());
            }
            for (size_t k = 0; k < G.v.size(); ++k) G.v[k] += 2.0 * opts.gamma * acc[k];
        }

        fold_constraints(G, bc);
        return J;
    }

    void constrain(GridFunction2D& V, const BoundaryConstraint& bc) const {
        for (int it = 0; it < nt; ++it) {
            V.at(0, it) = bc.q0[static_cast<size_t>(it)];
            if (bc.neumann_order == 2)
                V.at(1, it) = (2.0 * dy * bc.q1[static_cast<size_t>(it)] + 3.0 * V.at(0, it) +
                               V.at(2, it)) / 4.0;
            else
                V.at(1, it) = bc.q0[static_cast<size_t>(it)] + dy * bc.q1[static_cast<size_t>(it)];
            V.at(ny - 1, it) = (4.0 * V.at(ny - 2, it) - V.at(ny - 3, it)) / 3.0;
        }
    }

    // The first grid row sets the coefficient of the zeroth-order term, so
    // curvature along "derivative of row 0" directions scales with the
    // weighted mass of V itself and dwarfs everything the tensor metric
    // sees. The augmentation M + 32 R0^T diag(Cw) R0, with R0 = (row-0
    // extraction) o d/dY and Cw the weighted tau-mass of the starting field,
    // absorbs it; the Woodbury identity keeps the solve cheap because R0 is
    // separable.
    void build_row0_metric(const GridFunction2D& V0) const {
        const int nyf = ny - 3;
        const double w0 = dy * dtau;
        // A_tau^{-1} e0
        atau_e0.assign(static_cast<size_t>(nt), 0.0);
        atau_e0[0] = 1.0;
        metric_t.solve(atau_e0.data());
        const double s0 = atau_e0[0];
        // weighted tau-mass of the seed, clamped away from zero
        std::vector<double> cw(static_cast<size_t>(nyf), 0.0);
        for (int iy = 0; iy < nyf; ++iy) {
            double acc = 0.0;
            for (int it = 0; it < nt; ++it) {
                size_t k = idx(iy + 2, it);
                acc += wq[k] * psi[k] * V0.v[k] * V0.v[k];
            }
            cw[static_cast<size_t>(iy)] = std::max(acc, 1e-12);
        }
        // K = diag(1/(32 cw)) + (s0/w0) * D1 A_Y^{-1} D1^T, dense SPD
        k_fact.assign(static_cast<size_t>(nyf) * nyf, 0.0);
        std::vector<double> col(static_cast<size_t>(nyf)), basis(static_cast<size_t>(nyf));
        for (int j = 0; j < nyf; ++j) {
            std::fill(basis.begin(), basis.end(), 0.0);
            basis[static_cast<size_t>(j)] = 1.0;
            d1_line_adj(basis.data(), col.data(), nyf, dy);
            metric_y.solve(col.data());
            std::vector<double> w(static_cast<size_t>(nyf));
            d1_line(col.data(), w.data(), nyf, dy);
            for (int i = 0; i < nyf; ++i)
                k_fact[static_cast<size_t>(i) * nyf + j] = s0 / w0 * w[static_cast<size_t>(i)];
        }
        for (int i = 0; i < nyf; ++i)
            k_fact[static_cast<size_t>(i) * nyf + i] += 1.0 / (32.0 * cw[static_cast<size_t>(i)]);
        // in-place dense Cholesky (lower)
        for (int j = 0; j < nyf; ++j) {
            double d = k_fact[static_cast<size_t>(j) * nyf + j];
            for (int k = 0; k < j; ++k) {
                double l = k_fact[static_cast<size_t>(j) * nyf + k];
                d -= l * l;
            }
            if (!(d > 0.0)) throw SolverError("row-0 metric factorization lost positivity");
            d = std::sqrt(d);
            k_fact[static_cast<size_t>(j) * nyf + j] = d;
            for (int i = j + 1; i < nyf; ++i) {
                double v = k_fact[static_cast<size_t>(i) * nyf + j];
                for (int k = 0; k < j; ++k)
                    v -= k_fact[static_cast<size_t>(i) * nyf + k] *
                         k_fact[static_cast<size_t>(j) * nyf + k];
                k_fact[static_cast<size_t>(i) * nyf + j] = v / d;
            }
        }
        row0_metric = true;
    }

    void k_solve(std::vector<double>& x) const {
        const int nyf = ny - 3;
        for (int i = 0; i < nyf; ++i) {
            double v = x[static_cast<size_t>(i)];
            for (int k = 0; k < i; ++k)
                v -= k_fact[static_cast<size_t>(i) * nyf + k] * x[static_cast<size_t>(k)];
            x[static_cast<size_t>(i)] = v / k_fact[static_cast<size_t>(i) * nyf + i];
        }
        for (int i = nyf - 1; i >= 0; --i) {
            double v = x[static_cast<size_t>(i)];
            for (int k = i + 1; k < nyf; ++k)
                v -= k_fact[static_cast<size_t>(k) * nyf + i] * x[static_cast<size_t>(k)];
            x[static_cast<size_t>(i)] = v / k_fact[static_cast<size_t>(i) * nyf + i];
        }
    }

    // metric solve on the free block, result overwrites P
    void smooth_gradient(GridFunction2D& P) const {
        const int nyf = ny - 3;
        std::vector<double> block(static_cast<size_t>(nyf) * nt);
        for (int it = 0; it < nt; ++it)
            for (int iy = 0; iy < nyf; ++iy)
                block[static_cast<size_t>(it) * nyf + iy] = P.at(iy + 2, it);
        for (int it = 0; it < nt; ++it) metric_y.solve(block.data() + static_cast<size_t>(it) * nyf);
        std::vector<double> line(static_cast<size_t>(nt));
        for (int iy = 0; iy < nyf; ++iy) {
            for (int it = 0; it < nt; ++it) line[it] = block[static_cast<size_t>(it) * nyf + iy];
            metric_t.solve(line.data());
            for (int it = 0; it < nt; ++it) block[static_cast<size_t>(it) * nyf + iy] = line[it];
        }
        const double w0 = dy * dtau;
        if (row0_metric) {
            // Woodbury correction: subtract M^{-1} R0^T K^{-1} R0 M^{-1} g
            std::vector<double> u(static_cast<size_t>(nyf));
            d1_line(block.data(), u.data(), nyf, dy);  // row it = 0 is block's head
            for (auto& v : u) v /= w0;
            k_solve(u);
            std::vector<double> a(static_cast<size_t>(nyf));
            d1_line_adj(u.data(), a.data(), nyf, dy);
            metric_y.solve(a.data());
            for (int it = 0; it < nt; ++it) {
                double bt = atau_e0[static_cast<size_t>(it)];
                if (bt == 0.0) continue;
                double* row = block.data() + static_cast<size_t>(it) * nyf;
                for (int iy = 0; iy < nyf; ++iy) row[iy] -= a[static_cast<size_t>(iy)] * bt;
            }
        }
        std::fill(P.v.begin(), P.v.end(), 0.0);
        for (int it = 0; it < nt; ++it)
            for (int iy = 0; iy < nyf; ++iy)
                P.at(iy + 2, it) = block[static_cast<size_t>(it) * nyf + iy] / w0;
    }

    double seminorm_sq(const GridFunction2D& V, const std::vector<Op>& chain,
                       const std::vector<double>& weights) const {
        const double* d = apply_chain(chain, V.v.data());
        double acc = 0.0;
        for (size_t k = 0; k < weights.size(); ++k) acc += weights[k] * d[k] * d[k];
        return acc;
    }

    double h2_sq(const GridFunction2D& V, const std::vector<double>& weights) const {
        static const std::vector<std::vector<Op>> h2 = {
            {}, {Op::Y1}, {Op::T1}, {Op::Y2}, {Op::Y1, Op::T1}, {Op::T2}};
        double acc = 0.0;
        for (const auto& chain : h2) acc += seminorm_sq(V, chain, weights);
        return acc;
    }
};

ConvexCostFunctional::ConvexCostFunctional(int ny, int nt, double dy, double dtau,
                                           SolverOptions opts)
    : impl_(std::make_unique<Impl>(ny, nt, dy, dtau, std::move(opts))) {}

ConvexCostFunctional::~ConvexCostFunctional() = default;

int ConvexCostFunctional::ny() const { return impl_->ny; }
int ConvexCostFunctional::nt() const { return impl_->nt; }
const SolverOptions& ConvexCostFunctional::options() const { return impl_->opts; }

GridFunction2D ConvexCostFunctional::make_grid() const {
    return GridFunction2D(impl_->ny, impl_->nt, impl_->dy, impl_->dtau);
}

GridFunction2D ConvexCostFunctional::residual(const GridFunction2D& V) const {
    GridFunction2D S = make_grid();
    impl_->residual_into(V, S);
    return S;
}

double ConvexCostFunctional::cost(const GridFunction2D& V) const {
    return impl_->cost_value(V, nullptr);
}

GridFunction2D ConvexCostFunctional::gradient(const GridFunction2D& V,
                                              const BoundaryConstraint& bc) const {
    GridFunction2D G = make_grid();
    impl_->gradient_into(V, bc, G);
    return G;
}

double ConvexCostFunctional::cost_and_gradient(const GridFunction2D& V,
                                               const BoundaryConstraint& bc,
                                               GridFunction2D& grad) const {
    return impl_->gradient_into(V, bc, grad);
}

double ConvexCostFunctional::h2_norm(const GridFunction2D& V) const {
    return std::sqrt(impl_->h2_sq(V, impl_->wq));
}

double ConvexCostFunctional::reg_norm_value(const GridFunction2D& V) const {
    double acc = 0.0;
    for (const auto& chain : impl_->reg_chains) acc += impl_->seminorm_sq(V, chain, impl_->wq);
    return std::sqrt(acc);
}

double ConvexCostFunctional::h2_norm_triangle(const GridFunction2D& V, double mu) const {
    const double b = impl_->dy * (impl_->ny - 1);
    std::vector<double> weights = impl_->wq;
    for (int it = 0; it < impl_->nt; ++it)
        for (int iy = 0; iy < impl_->ny; ++iy)
            if (impl_->dy * iy + impl_->opts.alpha * impl_->dtau * it >=
                2.0 * impl_->opts.alpha * b - mu)
                weights[impl_->idx(iy, it)] = 0.0;
    return std::sqrt(impl_->h2_sq(V, weights));
}

GridFunction2D ConvexCostFunctional::extension(const BoundaryConstraint& bc) const {
    if (static_cast<int>(bc.q0.size()) != impl_->nt || bc.q1.size() != bc.q0.size())
        throw SolverError("extension: boundary data must match the tau grid");
    GridFunction2D V = make_grid();
    const double b = impl_->dy * (impl_->ny - 1);
    const double decay = impl_->opts.seed_decay;
    for (int it = 0; it < impl_->nt; ++it)
        for (int iy = 0; iy < impl_->ny; ++iy) {
            double yy = impl_->dy * iy;
            double shape = yy * (1.0 - yy / b) * (1.0 - yy / b);
            // keep the Neumann filler near the data boundary; spreading it
            // across the whole span inflates the nonlinear term
            if (decay > 0.0) shape *= std::exp(-(yy * yy) / (decay * decay));
            V.at(iy, it) = bc.q0[static_cast<size_t>(it)] + bc.q1[static_cast<size_t>(it)] * shape;
        }
    impl_->constrain(V, bc);
    return V;
}

void ConvexCostFunctional::apply_constraints(GridFunction2D& V,
                                             const BoundaryConstraint& bc) const {
    impl_->constrain(V, bc);
}

CarlemanReport ConvexCostFunctional::carleman_certificate(const GridFunction2D& u, double lambda,
                                                          double membership_tol) const {
    auto& im = *impl_;
    // membership in the zero-trace subspace
    im.apply_y(u.v.data(), im.sc3.data(), false);
    double umax = 0.0, uymax = 0.0;
    for (size_t k = 0; k < u.v.size(); ++k) {
        umax = std::max(umax, std::abs(u.v[k]));
        uymax = std::max(uymax, std::abs(im.sc3[k]));
    }
    if (umax == 0.0) return {0.0, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity()};
    for (int it = 0; it < im.nt; ++it) {
        if (std::abs(u.at(0, it)) > membership_tol * umax ||
            std::abs(im.sc3[im.idx(0, it)]) > membership_tol * uymax ||
            std::abs(im.sc3[im.idx(im.ny - 1, it)]) > membership_tol * uymax)
            throw SolverError("carleman_certificate: traces at Y = 0 or Y = b do not vanish");
    }

    im.apply_t(im.sc3.data(), im.sc4.data(), false);  // u_Ytau
    im.apply_y(u.v.data(), im.sc1.data(), true);      // u_YY
    im.apply_t(u.v.data(), im.sc2.data(), false);     // u_tau

    CarlemanReport rep;
    const double alpha = im.opts.alpha;
    const double l3 = lambda * lambda * lambda;
    for (int it = 0; it < im.nt; ++it)
        for (int iy = 0; iy < im.ny; ++iy) {
            size_t k = im.idx(iy, it);
            double w = std::exp(-2.0 * lambda * (im.dy * iy + alpha * im.dtau * it));
            double principal = im.sc1[k] - 2.0 * im.sc4[k];
            rep.lhs += im.wq[k] * w * principal * principal;
            double uy = im.sc3[k], ut = im.sc2[k];
            rep.interior += im.wq[k] * w * (lambda * (uy * uy + ut * ut) + l3 * u.v[k] * u.v[k]);
        }
    const double t_end = im.dtau * (im.nt - 1);
    for (int iy = 0; iy < im.ny; ++iy) {
        double cy = (iy == 0 || iy == im.ny - 1) ? 0.5 : 1.0;
        double uy0 = im.sc3[im.idx(iy, 0)], u0 = u.at(iy, 0);
        rep.initial += im.dy * cy * std::exp(-2.0 * lambda * im.dy * iy) *
                       (lambda * uy0 * uy0 + l3 * u0 * u0);
        double uyT = im.sc3[im.idx(iy, im.nt - 1)], uT = u.at(iy, im.nt - 1);
        rep.terminal += im.dy * cy * std::exp(-2.0 * lambda * t_end) *
                        (lambda * uyT * uyT + l3 * uT * uT);
    }
    double denom = rep.interior + rep.initial - rep.terminal;
    rep.constant = denom > 0.0 ? rep.lhs / denom : std::numeric_limits<double>::infinity();
    return rep;
}

double ConvexCostFunctional::convexity_gap(const GridFunction2D& V1, const GridFunction2D& V2,
                                           const BoundaryConstraint& bc) const {
    GridFunction2D G = make_grid();
    double j1 = impl_->gradient_into(V1, bc, G);
    double j2 = impl_->cost_value(V2, nullptr);
    GridFunction2D diff = V2;
    for (size_t k = 0; k < diff.v.size(); ++k) diff.v[k] -= V1.v[k];
    double lin = grid_dot(G, diff);
    double quad = impl_->h2_sq(diff, impl_->wq);
    return j2 - j1 - lin - 0.5 * impl_->opts.gamma * quad;
}

DescentState ConvexCostFunctional::minimize(const BoundaryConstraint& bc) const {
    auto& im = *impl_;
    if (static_cast<int>(bc.q0.size()) != im.nt || bc.q1.size() != bc.q0.size())
        throw SolverError("minimize: boundary data must match the tau grid");

    std::ofstream trace;
    if (!im.opts.trace_path.empty()) {
        trace.open(im.opts.trace_path);
        if (!trace) throw IoError("minimize: cannot write trace " + im.opts.trace_path);
        trace.precision(12);
        trace << "iteration,cost,grad_norm\n";
    }

    DescentState st;
    st.V = extension(bc);
    if (im.opts.metric == GradientMetric::Smoothed) im.build_row0_metric(st.V);
    GridFunction2D G = make_grid(), P = make_grid(), Vt = make_grid(), Gt = make_grid();
    st.cost = im.gradient_into(st.V, bc, G);
    st.grad_norm = std::sqrt(grid_dot(G, G));

    double step = im.opts.step;
    auto log_iter = [&](int n) {
        st.cost_history.push_back(st.cost);
        st.grad_norm_history.push_back(st.grad_norm);
        if (im.opts.track_reference) {
            GridFunction2D d = st.V;
            for (size_t k = 0; k < d.v.size(); ++k) d.v[k] -= im.opts.track_reference->v[k];
            st.distance_history.push_back(h2_norm(d));
        }
        if (trace.is_open()) trace << n << "," << st.cost << "," << st.grad_norm << "\n";
    };
    log_iter(0);

    int n = 0;
    st.stop_reason = "max_iters";
    while (n < im.opts.max_iters) {
        if (st.grad_norm < im.opts.grad_tol * (1.0 + std::abs(st.cost))) {
            st.stop_reason = "gradient_tolerance";
            break;
        }
        P = G;
        if (im.opts.metric == GradientMetric::Smoothed) im.smooth_gradient(P);

        bool accepted = false;
        while (!accepted) {
            Vt = st.V;
            for (size_t k = 0; k < Vt.v.size(); ++k) Vt.v[k] -= step * P.v[k];
            im.constrain(Vt, bc);
            double jt = im.gradient_into(Vt, bc, Gt);
            if (jt <= st.cost * (1.0 + 1e-14) + 1e-300) {
                std::swap(st.V, Vt);
                std::swap(G, Gt);
                st.cost = jt;
                st.grad_norm = std::sqrt(grid_dot(G, G));
                accepted = true;
            } else {
                step *= 0.5;
                if (step < im.opts.step * 1e-12)
                    throw SolverError(
                        "minimize diverged: step underflow at iteration " + std::to_string(n) +
                        ", cost " + std::to_string(st.cost));
            }
        }
        ++n;
        log_iter(n);

        double vh2 = h2_norm(st.V);
        if (vh2 > im.opts.ball_radius_max)
            throw SolverError("minimize left the working ball: |V|_H2 = " + std::to_string(vh2));

        int w = im.opts.stall_window;
        if (w > 0 && static_cast<int>(st.cost_history.size()) > w) {
            double before = st.cost_history[st.cost_history.size() - 1 - w];
            if (before - st.cost <= im.opts.stall_rel * (std::abs(st.cost) + 1e-300)) {
                st.stop_reason = "cost_stall";
                break;
            }
        }
    }
    st.iterations = n;
    st.final_step = step;
    return st;
}

double grid_dot(const GridFunction2D& a, const GridFunction2D& b) {
    double acc = 0.0;
    for (size_t k = 0; k < a.v.size(); ++k) acc += a.v[k] * b.v[k];
    return acc;
}

}  // namespace sarcvx
