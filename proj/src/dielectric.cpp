#include "sarcvx/dielectric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace sarcvx {

DielectricField::DielectricField(double radius, int n)
    : radius_(radius), n_(n), h_(2.0 * radius / (n - 1)),
      values_(static_cast<size_t>(n) * n * n, 1.0) {}

double DielectricField::sample(const Vec3& p) const {
    auto clampf = [&](double c) {
        return std::clamp((c + radius_) / h_, 0.0, static_cast<double>(n_ - 1));
    };
    double fx = clampf(p.x), fy = clampf(p.y), fz = clampf(p.z);
    int i0 = std::min(static_cast<int>(fx), n_ - 2);
    int j0 = std::min(static_cast<int>(fy), n_ - 2);
    int k0 = std::min(static_cast<int>(fz), n_ - 2);
    double wx = fx - i0, wy = fy - j0, wz = fz - k0;
    double v = 0.0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di)
                v += at(i0 + di, j0 + dj, k0 + dk) * (di ? wx : 1 - wx) * (dj ? wy : 1 - wy) *
                     (dk ? wz : 1 - wz);
    return v;
}

void DielectricField::validate() const {
    for (double v : values_)
        if (!std::isfinite(v) || v < 1.0 - 1e-12)
            throw ConfigError("dielectric field: values must be finite and >= 1");
    for (int k = 0; k < n_; ++k) {
        if (coord(k) <= 0.0) continue;
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < n_; ++i)
                if (std::abs(at(i, j, k) - 1.0) > 1e-12)
                    throw ConfigError("dielectric field: air region must equal 1");
    }
}

namespace {

// 0 -> 1 cosine step over [-w, 0]; used for all material blends.
double cosine_step(double d, double w) {
    if (d >= 0.0) return 1.0;
    if (d <= -w) return 0.0;
    return 0.5 * (1.0 + std::cos(M_PI * (-d) / w));
}

// taper weight of a signed distance: 1 deep inside, 1/2 on the surface,
// 0 beyond one half-width outside
double solid_weight(double d, double half_w) {
    double t = (d + half_w) / (2.0 * half_w);
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    return 0.5 * (1.0 + std::cos(M_PI * t));
}

void paint_sand(DielectricField& f, double sand_eps) {
    const double ramp = 2.0 * f.h();
    for (int k = 0; k < f.n(); ++k) {
        double z = f.coord(k);
        double v = 1.0;
        if (z <= -ramp) v = sand_eps;
        else if (z < 0.0) v = 1.0 + (sand_eps - 1.0) * (0.5 - 0.5 * std::cos(M_PI * (-z) / ramp));
        for (int j = 0; j < f.n(); ++j)
            for (int i = 0; i < f.n(); ++i) f.at(i, j, k) = v;
    }
}

// Paints max(current, blend(eps_inside)) where inside is the taper weight of
// a signed distance. The taper spans two cells centered on the surface but
// never more than the solid can hold, so thin targets keep their full
// contrast at the center.
template <typename DistFn>
void paint_solid(DielectricField& f, double eps_inside, double min_half_thickness,
                 DistFn signed_distance) {
    const double half_w = std::min(f.h(), 0.9 * min_half_thickness);
    for (int k = 0; k < f.n(); ++k)
        for (int j = 0; j < f.n(); ++j)
            for (int i = 0; i < f.n(); ++i) {
                Vec3 p{f.coord(i), f.coord(j), f.coord(k)};
                double d = signed_distance(p);  // negative inside
                if (d >= half_w) continue;
                double v = 1.0 + (eps_inside - 1.0) * solid_weight(d, half_w);
                f.at(i, j, k) = std::max(f.at(i, j, k), v);
            }
}

}  // namespace

DielectricField make_background(double radius, int n, double sand_eps) {
    DielectricField f(radius, n);
    paint_sand(f, sand_eps);
    return f;
}

DielectricField make_ellipsoid_model(double radius, int n, double sand_eps, Vec3 center,
                                     Vec3 semi_axes, double eps_inside) {
    DielectricField f = make_background(radius, n, sand_eps);
    double min_axis = std::min({semi_axes.x, semi_axes.y, semi_axes.z});
    paint_solid(f, eps_inside, min_axis, [&](const Vec3& p) {
        Vec3 q = p - center;
        double rho = std::sqrt(q.x * q.x / (semi_axes.x * semi_axes.x) +
                               q.y * q.y / (semi_axes.y * semi_axes.y) +
                               q.z * q.z / (semi_axes.z * semi_axes.z));
        if (rho < 1e-12) return -std::min({semi_axes.x, semi_axes.y, semi_axes.z});
        // first-order distance estimate: (rho - 1) / |grad rho|
        double g = std::sqrt(q.x * q.x / std::pow(semi_axes.x, 4) +
                             q.y * q.y / std::pow(semi_axes.y, 4) +
                             q.z * q.z / std::pow(semi_axes.z, 4)) / rho;
        return (rho - 1.0) / g;
    });
    return f;
}

DielectricField make_prism_model(double radius, int n, double sand_eps, Vec3 center,
                                 Vec3 dimensions, double eps_inside) {
    DielectricField f = make_background(radius, n, sand_eps);
    Vec3 half = dimensions * 0.5;
    paint_solid(f, eps_inside, std::min({half.x, half.y, half.z}), [&](const Vec3& p) {
        Vec3 q = p - center;
        double dx = std::abs(q.x) - half.x;
        double dy = std::abs(q.y) - half.y;
        double dz = std::abs(q.z) - half.z;
        double ox = std::max(dx, 0.0), oy = std::max(dy, 0.0), oz = std::max(dz, 0.0);
        double outside = std::sqrt(ox * ox + oy * oy + oz * oz);
        double inside = std::min(std::max({dx, dy, dz}), 0.0);
        return outside + inside;
    });
    return f;
}

DielectricField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("dielectric: cannot open " + path);
    nlohmann::json hdr;
    std::string line;
    if (!std::getline(in, line)) throw IoError("dielectric: missing header in " + path);
    hdr = nlohmann::json::parse(line);
    int n = hdr.at("n").get<int>();
    double radius = hdr.at("radius").get<double>();
    DielectricField f(radius, n);
    std::vector<double> buf(static_cast<size_t>(n) * n * n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) throw IoError("dielectric: truncated data in " + path);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                f.at(i, j, k) = buf[(static_cast<size_t>(k) * n + j) * n + i];
    f.validate();
    return f;
}

void save_field(const DielectricField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("dielectric: cannot write " + path);
    nlohmann::json hdr{{"n", f.n()}, {"radius", f.radius()}, {"spacing", f.h()}};
    out << hdr.dump() << "\n";
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.values().size() * sizeof(double)));
}

}  // namespace sarcvx
