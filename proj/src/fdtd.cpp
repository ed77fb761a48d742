#include "sarcvx/fdtd.hpp"

#include <algorithm>
#include <cmath>

#include "sarcvx/parallel.hpp"

namespace sarcvx {

double chirp_time_factor(const SourcePulse& pulse, double t) {
    if (t <= 0.0 || t > pulse.tau0) return 0.0;
    double half = 0.5 * pulse.tau0;
    return std::cos(pulse.omega0 * t + pulse.alpha0 * (t - half) * (t - half));
}

Vec3 rotate_to_antenna_frame(const Vec3& x, const Vec3& x0, double elevation_angle) {
    double c = std::cos(elevation_angle), s = std::sin(elevation_angle);
    Vec3 d = x - x0;
    return {d.x, c * d.y - s * d.z, s * d.y + c * d.z};
}

bool disk_indicator(const Vec3& x, const Vec3& x0, const SourcePulse& pulse,
                    double elevation_angle) {
    Vec3 r = rotate_to_antenna_frame(x, x0, elevation_angle);
    return std::sqrt(r.x * r.x + r.y * r.y) < pulse.disk_radius &&
           std::abs(r.z) <= pulse.disk_thickness;
}

namespace {

struct SourceCells {
    std::vector<size_t> cells;
    Vec3 position;
};

SourceCells collect_source_cells(const DielectricField& medium, const Vec3& x0,
                                 const SourcePulse& pulse, double theta) {
    SourceCells sc;
    sc.position = x0;
    const int n = medium.n();
    // scan only the bounding box of the disk
    double reach = pulse.disk_radius + pulse.disk_thickness + medium.h();
    auto clamp_idx = [&](double c) {
        return std::clamp(static_cast<int>(std::floor((c + medium.radius()) / medium.h())), 0,
                          n - 1);
    };
    int i0 = clamp_idx(x0.x - reach), i1 = clamp_idx(x0.x + reach);
    int j0 = clamp_idx(x0.y - reach), j1 = clamp_idx(x0.y + reach);
    int k0 = clamp_idx(x0.z - reach), k1 = clamp_idx(x0.z + reach);
    for (int k = k0; k <= k1; ++k)
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                Vec3 p{medium.coord(i), medium.coord(j), medium.coord(k)};
                if (disk_indicator(p, x0, pulse, theta)) sc.cells.push_back(medium.idx(i, j, k));
            }
    if (sc.cells.empty()) {
        // disk thinner than the grid: fall back to the nearest cell
        int i = clamp_idx(x0.x), j = clamp_idx(x0.y), k = clamp_idx(x0.z);
        sc.cells.push_back(medium.idx(i, j, k));
    }
    return sc;
}

struct Sampler {
    size_t base;
    int n;
    double wx, wy, wz;

    double operator()(const std::vector<double>& u) const {
        size_t s1 = 1, sn = static_cast<size_t>(n), snn = sn * sn;
        auto v = [&](int di, int dj, int dk) {
            return u[base + di * s1 + dj * sn + dk * snn];
        };
        return v(0, 0, 0) * (1 - wx) * (1 - wy) * (1 - wz) + v(1, 0, 0) * wx * (1 - wy) * (1 - wz) +
               v(0, 1, 0) * (1 - wx) * wy * (1 - wz) + v(1, 1, 0) * wx * wy * (1 - wz) +
               v(0, 0, 1) * (1 - wx) * (1 - wy) * wz + v(1, 0, 1) * wx * (1 - wy) * wz +
               v(0, 1, 1) * (1 - wx) * wy * wz + v(1, 1, 1) * wx * wy * wz;
    }
};

Sampler make_sampler(const DielectricField& medium, const Vec3& p) {
    const int n = medium.n();
    auto f = [&](double c) {
        return std::clamp((c + medium.radius()) / medium.h(), 0.0, static_cast<double>(n - 1));
    };
    double fx = f(p.x), fy = f(p.y), fz = f(p.z);
    int i = std::min(static_cast<int>(fx), n - 2);
    int j = std::min(static_cast<int>(fy), n - 2);
    int k = std::min(static_cast<int>(fz), n - 2);
    return {medium.idx(i, j, k), n, fx - i, fy - j, fz - k};
}

// Absorbing update for all six faces: one-sided normal difference plus a
// centered time derivative, d_n u + sqrt(eps) u_t = 0.
void update_boundary(const DielectricField& medium, const std::vector<double>& u_prev,
                     std::vector<double>& u_next, double dt) {
    const int n = medium.n();
    const double h = medium.h();
    auto idx = [&](int i, int j, int k) { return medium.idx(i, j, k); };
    auto absorb = [&](size_t bidx, size_t nidx) {
        double c = std::sqrt(medium.values()[bidx]) / (2.0 * dt);
        u_next[bidx] = (u_next[nidx] / h + c * u_prev[bidx]) / (1.0 / h + c);
    };
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) {
            absorb(idx(0, a, b), idx(1, a, b));
            absorb(idx(n - 1, a, b), idx(n - 2, a, b));
            absorb(idx(a, 0, b), idx(a, 1, b));
            absorb(idx(a, n - 1, b), idx(a, n - 2, b));
            absorb(idx(a, b, 0), idx(a, b, 1));
            absorb(idx(a, b, n - 1), idx(a, b, n - 2));
        }
}

void check_finite(const std::vector<double>& u, int step, double t) {
    for (size_t k = 0; k < u.size(); k += 97)
        if (!std::isfinite(u[k]))
            throw SimulationError("simulate: non-finite field at step " + std::to_string(step) +
                                  " (t = " + std::to_string(t) + ")");
}

TimeSeriesRecord run_explicit(const DielectricField& medium, const Vec3& x0,
                              const SourcePulse& pulse, double theta, double t_max, int nt) {
    const int n = medium.n();
    const double h = medium.h();
    const double dt_sample = t_max / (nt - 1);
    // stability bound for speed-1 media; substep when sampling is coarser
    const double dt_stable = 0.9 * h / std::sqrt(3.0);
    const int sub = std::max(1, static_cast<int>(std::ceil(dt_sample / dt_stable)));
    const double dt = dt_sample / sub;

    SourceCells sc = collect_source_cells(medium, x0, pulse, theta);
    Sampler sample = make_sampler(medium, x0);

    size_t total = static_cast<size_t>(n) * n * n;
    std::vector<double> um(total, 0.0), uc(total, 0.0), un(total, 0.0);
    const std::vector<double>& eps = medium.values();

    TimeSeriesRecord rec;
    rec.dt = dt_sample;
    rec.samples.assign(static_cast<size_t>(nt), 0.0);

    const double r = dt * dt / (h * h);
    const size_t sx = 1, sy = static_cast<size_t>(n), sz = sy * sy;
    int isample = 1;
    for (int step = 0; isample < nt; ++step) {
        double t_now = dt * step;
        // interior leapfrog
        for (int k = 1; k + 1 < n; ++k)
            for (int j = 1; j + 1 < n; ++j) {
                size_t base = medium.idx(1, j, k);
                for (int i = 1; i + 1 < n; ++i, ++base) {
                    double lap = uc[base + sx] + uc[base - sx] + uc[base + sy] + uc[base - sy] +
                                 uc[base + sz] + uc[base - sz] - 6.0 * uc[base];
                    un[base] = 2.0 * uc[base] - um[base] + r / eps[base] * lap;
                }
            }
        double f = chirp_time_factor(pulse, t_now);
        if (f != 0.0)
            for (size_t cell : sc.cells) un[cell] += dt * dt / eps[cell] * f;
        update_boundary(medium, um, un, dt);

        std::swap(um, uc);
        std::swap(uc, un);
        if (step % 25 == 0) check_finite(uc, step, t_now + dt);

        if ((step + 1) % sub == 0) {
            rec.samples[static_cast<size_t>(isample)] = sample(uc);
            ++isample;
        }
    }
    return rec;
}

// Matrix-free conjugate gradient for the implicit step. The operator acts on
// interior nodes only; boundary values ride along as frozen data.
void apply_implicit(const DielectricField& medium, double dt, const std::vector<double>& x,
                    std::vector<double>& out) {
    const int n = medium.n();
    const double h2 = medium.h() * medium.h();
    const std::vector<double>& eps = medium.values();
    const size_t sx = 1, sy = static_cast<size_t>(n), sz = sy * sy;
    for (int k = 1; k + 1 < n; ++k)
        for (int j = 1; j + 1 < n; ++j) {
            size_t base = medium.idx(1, j, k);
            for (int i = 1; i + 1 < n; ++i, ++base) {
                double lap = x[base + sx] + x[base - sx] + x[base + sy] + x[base - sy] +
                             x[base + sz] + x[base - sz] - 6.0 * x[base];
                out[base] = eps[base] / (dt * dt) * x[base] - 0.5 * lap / h2;
            }
        }
}

double interior_dot(const DielectricField& medium, const std::vector<double>& a,
                    const std::vector<double>& b) {
    const int n = medium.n();
    double acc = 0.0;
    for (int k = 1; k + 1 < n; ++k)
        for (int j = 1; j + 1 < n; ++j) {
            size_t base = medium.idx(1, j, k);
            for (int i = 1; i + 1 < n; ++i, ++base) acc += a[base] * b[base];
        }
    return acc;
}

TimeSeriesRecord run_implicit(const DielectricField& medium, const Vec3& x0,
                              const SourcePulse& pulse, double theta, double t_max, int nt) {
    const int n = medium.n();
    const double h = medium.h();
    const double h2 = h * h;
    const double dt = t_max / (nt - 1);

    SourceCells sc = collect_source_cells(medium, x0, pulse, theta);
    Sampler sample = make_sampler(medium, x0);

    size_t total = static_cast<size_t>(n) * n * n;
    std::vector<double> um(total, 0.0), uc(total, 0.0), un(total, 0.0);
    std::vector<double> rhs(total, 0.0), r(total, 0.0), p(total, 0.0), ap(total, 0.0);
    const std::vector<double>& eps = medium.values();
    const size_t sx = 1, sy = static_cast<size_t>(n), sz = sy * sy;

    TimeSeriesRecord rec;
    rec.dt = dt;
    rec.samples.assign(static_cast<size_t>(nt), 0.0);

    for (int step = 1; step < nt; ++step) {
        double t_now = dt * (step - 1);
        double f = chirp_time_factor(pulse, t_now);
        // rhs = (2 eps/dt^2) uc - (eps/dt^2) um + 0.5 lap(um) + F
        for (int k = 1; k + 1 < n; ++k)
            for (int j = 1; j + 1 < n; ++j) {
                size_t base = medium.idx(1, j, k);
                for (int i = 1; i + 1 < n; ++i, ++base) {
                    double lap = um[base + sx] + um[base - sx] + um[base + sy] + um[base - sy] +
                                 um[base + sz] + um[base - sz] - 6.0 * um[base];
                    rhs[base] = eps[base] / (dt * dt) * (2.0 * uc[base] - um[base]) +
                                0.5 * lap / h2;
                }
            }
        if (f != 0.0)
            for (size_t cell : sc.cells) rhs[cell] += f;

        // initial guess: extrapolated field; boundary rides along frozen
        for (size_t q = 0; q < total; ++q) un[q] = 2.0 * uc[q] - um[q];
        apply_implicit(medium, dt, un, ap);
        for (size_t q = 0; q < total; ++q) r[q] = rhs[q] - ap[q];
        // zero residual on non-interior entries
        double rr = interior_dot(medium, r, r);
        double rr0 = rr;
        p = r;
        int cg = 0;
        for (; cg < 200 && rr > 1e-16 * (rr0 + 1e-300); ++cg) {
            apply_implicit(medium, dt, p, ap);
            double pap = interior_dot(medium, p, ap);
            if (pap <= 0.0) break;
            double a = rr / pap;
            for (int k = 1; k + 1 < n; ++k)
                for (int j = 1; j + 1 < n; ++j) {
                    size_t base = medium.idx(1, j, k);
                    for (int i = 1; i + 1 < n; ++i, ++base) {
                        un[base] += a * p[base];
                        r[base] -= a * ap[base];
                    }
                }
            double rr_new = interior_dot(medium, r, r);
            double beta = rr_new / rr;
            rr = rr_new;
            for (int k = 1; k + 1 < n; ++k)
                for (int j = 1; j + 1 < n; ++j) {
                    size_t base = medium.idx(1, j, k);
                    for (int i = 1; i + 1 < n; ++i, ++base) p[base] = r[base] + beta * p[base];
                }
        }
        update_boundary(medium, um, un, dt);

        std::swap(um, uc);
        std::swap(uc, un);
        if (step % 25 == 0) check_finite(uc, step, t_now + dt);
        rec.samples[static_cast<size_t>(step)] = sample(uc);
    }
    return rec;
}

}  // namespace

TimeSeriesRecord simulate(const DielectricField& medium, const AcquisitionGeometry& geometry,
                          const SourcePulse& pulse, int line, int source, double t_max, int nt,
                          TimeScheme scheme) {
    if (line < 0 || line >= geometry.line_count())
        throw SimulationError("simulate: line index out of range");
    if (source < 0 || source >= geometry.lines[static_cast<size_t>(line)].count)
        throw SimulationError("simulate: source index out of range");
    Vec3 x0 = geometry.lines[static_cast<size_t>(line)].position(source);
    double theta = geometry.elevation_angle;
    TimeSeriesRecord rec = scheme == TimeScheme::Explicit
                               ? run_explicit(medium, x0, pulse, theta, t_max, nt)
                               : run_implicit(medium, x0, pulse, theta, t_max, nt);
    rec.line = line;
    rec.source = source;
    rec.check_finite();
    return rec;
}

RecordSet simulate_all(const DielectricField& medium, const AcquisitionGeometry& geometry,
                       const SourcePulse& pulse, double t_max, int nt, TimeScheme scheme,
                       int workers) {
    RecordSet rs;
    int per_line = geometry.lines.front().count;
    rs.resize(geometry.line_count(), per_line, nt, t_max / (nt - 1));
    int total = geometry.line_count() * per_line;
    parallel_for(total, workers, [&](int q) {
        int j = q / per_line;
        int m = q % per_line;
        TimeSeriesRecord rec = simulate(medium, geometry, pulse, j, m, t_max, nt, scheme);
        std::copy(rec.samples.begin(), rec.samples.end(), rs.trace(j, m));
    });
    return rs;
}

}  // namespace sarcvx
