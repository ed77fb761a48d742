#include "sarcvx/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace sarcvx {

double clamp_profile(const std::vector<double>& column) {
    double m = 0.0;
    for (double v : column) {
        if (!std::isfinite(v)) throw SolverError("clamp_profile: non-finite profile value");
        m = std::max(m, std::abs(v));
    }
    return m > 500.0 ? 30.0 : m;
}

SlantRangeImage average_plane(const SlantRangeData& tsad,
                              const std::vector<double>& per_source_scalar) {
    if (!tsad.truncated) throw SolverError("average_plane: SAD has no truncation rectangle");
    if (per_source_scalar.size() != tsad.xs.size())
        throw SolverError("average_plane: one scalar per source required");
    if (tsad.s2 < tsad.s1) throw EmptyDetectionError("average_plane: empty rectangle");

    SlantRangeImage img;
    img.line = tsad.line;
    img.xs = tsad.xs;
    img.dys = tsad.dys;
    img.nys = tsad.nys;
    img.s1 = tsad.s1;
    img.s2 = tsad.s2;
    img.l1 = tsad.l1;
    img.l2 = tsad.l2;
    img.per_source.assign(tsad.xs.size(), 1.0);
    double acc = 0.0;
    int cnt = 0;
    for (int col = tsad.s1; col <= tsad.s2; ++col) {
        double v = per_source_scalar[static_cast<size_t>(col)];
        img.per_source[static_cast<size_t>(col)] = v;
        acc += v;
        ++cnt;
    }
    img.inside_value = acc / cnt;
    img.eps_max = std::max(img.inside_value, 1.0);
    return img;
}

namespace {

// travel-time range -> geometric distance along the central line, with the
// slower sand speed below the interface
double range_to_distance(double ys, double ground_range, double sand_eps) {
    if (ys <= ground_range) return ys;
    return ground_range + (ys - ground_range) / std::sqrt(sand_eps);
}

}  // namespace

VolumeImage fuse_volume(const std::vector<SlantRangeImage>& images,
                        const AcquisitionGeometry& geometry, double radius, int n,
                        double sand_eps) {
    const int planes = static_cast<int>(images.size());
    if (planes != geometry.line_count() || planes < 1)
        throw SolverError("fuse_volume: need one image per source line");

    double fused = 0.0;
    for (const auto& img : images) fused += img.eps_max;
    fused /= planes;

    const double theta = geometry.elevation_angle;
    const double st = std::sin(theta), ct = std::cos(theta);
    const double z0 = geometry.lines.front().z0;
    const double y0_first = geometry.lines.front().y0;
    const double spacing = geometry.line_spacing;
    const double ground_range = z0 / ct;

    // per-plane prism bounds: x interval and geometric range interval
    std::vector<std::array<double, 4>> bounds(static_cast<size_t>(planes));
    for (int j = 0; j < planes; ++j) {
        const auto& img = images[static_cast<size_t>(j)];
        bounds[static_cast<size_t>(j)] = {
            img.xs[static_cast<size_t>(img.s1)], img.xs[static_cast<size_t>(img.s2)],
            range_to_distance(img.dys * img.l1, ground_range, sand_eps),
            range_to_distance(img.dys * img.l2, ground_range, sand_eps)};
    }

    VolumeImage vol;
    vol.radius = radius;
    vol.n = n;
    vol.fused_value = fused;
    vol.values.assign(static_cast<size_t>(n) * n * n, 1.0);
    std::array<double, 3> lo{radius, radius, radius}, hi{-radius, -radius, -radius};

    for (int k = 0; k < n; ++k) {
        double z = vol.coord(k);
        for (int j = 0; j < n; ++j) {
            double y = vol.coord(j);
            // continuous plane index where this voxel is in-plane
            double jf = (y + (z - z0) * (st / ct) - y0_first) / spacing;
            if (jf < -0.5 || jf > planes - 0.5) continue;
            double jc = std::clamp(jf, 0.0, static_cast<double>(planes - 1));
            int ja = std::min(static_cast<int>(jc), planes - 2 >= 0 ? planes - 2 : 0);
            int jb = std::min(ja + 1, planes - 1);
            double w = jb > ja ? jc - ja : 0.0;
            auto lerp = [&](int comp) {
                return bounds[static_cast<size_t>(ja)][static_cast<size_t>(comp)] * (1.0 - w) +
                       bounds[static_cast<size_t>(jb)][static_cast<size_t>(comp)] * w;
            };
            double x_lo = lerp(0), x_hi = lerp(1), s_lo = lerp(2), s_hi = lerp(3);
            // in-plane range coordinate of the voxel
            double y0j = y0_first + jc * spacing;
            double s = (y - y0j) * st - (z - z0) * ct;
            if (s < s_lo || s > s_hi) continue;
            for (int i = 0; i < n; ++i) {
                double x = vol.coord(i);
                if (x < x_lo || x > x_hi) continue;
                vol.values[vol.idx(i, j, k)] = fused;
                vol.has_support = true;
                lo[0] = std::min(lo[0], x);
                hi[0] = std::max(hi[0], x);
                lo[1] = std::min(lo[1], y);
                hi[1] = std::max(hi[1], y);
                lo[2] = std::min(lo[2], z);
                hi[2] = std::max(hi[2], z);
            }
        }
    }
    vol.box_min = lo;
    vol.box_max = hi;
    return vol;
}

CrossSection cross_section(const VolumeImage& vol, char axis, double value) {
    if (axis != 'x' && axis != 'y' && axis != 'z')
        throw ConfigError("cross_section: axis must be x, y or z");
    if (value < -vol.radius || value > vol.radius)
        throw ConfigError("cross_section: plane lies outside the domain");
    CrossSection cs;
    cs.axis = axis;
    cs.value = value;
    cs.n = vol.n;
    cs.values.assign(static_cast<size_t>(vol.n) * vol.n, 1.0);

    double f = (value + vol.radius) / vol.h();
    int a = std::clamp(static_cast<int>(f), 0, vol.n - 2);
    double w = std::clamp(f - a, 0.0, 1.0);
    for (int r = 0; r < vol.n; ++r)
        for (int c = 0; c < vol.n; ++c) {
            double v0, v1;
            if (axis == 'x') {          // slice plane: rows = z, cols = y
                v0 = vol.at(a, c, r);
                v1 = vol.at(a + 1, c, r);
            } else if (axis == 'y') {   // rows = z, cols = x
                v0 = vol.at(c, a, r);
                v1 = vol.at(c, a + 1, r);
            } else {                    // rows = y, cols = x
                v0 = vol.at(c, r, a);
                v1 = vol.at(c, r, a + 1);
            }
            cs.values[static_cast<size_t>(r) * vol.n + c] = v0 * (1.0 - w) + v1 * w;
        }
    return cs;
}

void save_volume(const VolumeImage& vol, const std::string& path, const std::string& meta_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_volume: cannot write " + path);
    nlohmann::json hdr{{"n", vol.n},
                       {"radius", vol.radius},
                       {"spacing", vol.h()},
                       {"origin", {-vol.radius, -vol.radius, -vol.radius}},
                       {"fused_value", vol.fused_value},
                       {"has_support", vol.has_support},
                       {"box_min", vol.box_min},
                       {"box_max", vol.box_max}};
    if (!meta_json.empty()) hdr["meta"] = nlohmann::json::parse(meta_json);
    out << hdr.dump() << "\n";
    out.write(reinterpret_cast<const char*>(vol.values.data()),
              static_cast<std::streamsize>(vol.values.size() * sizeof(double)));
}

VolumeImage load_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_volume: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("load_volume: missing header");
    nlohmann::json hdr = nlohmann::json::parse(line);
    VolumeImage vol;
    vol.n = hdr.at("n").get<int>();
    vol.radius = hdr.at("radius").get<double>();
    vol.fused_value = hdr.at("fused_value").get<double>();
    vol.has_support = hdr.at("has_support").get<bool>();
    for (int i = 0; i < 3; ++i) {
        vol.box_min[static_cast<size_t>(i)] = hdr.at("box_min")[static_cast<size_t>(i)].get<double>();
        vol.box_max[static_cast<size_t>(i)] = hdr.at("box_max")[static_cast<size_t>(i)].get<double>();
    }
    vol.values.resize(static_cast<size_t>(vol.n) * vol.n * vol.n);
    in.read(reinterpret_cast<char*>(vol.values.data()),
            static_cast<std::streamsize>(vol.values.size() * sizeof(double)));
    if (!in) throw IoError("load_volume: truncated data");
    return vol;
}

void export_volume_vtk(const VolumeImage& vol, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("export_volume_vtk: cannot write " + path);
    out << "# vtk DataFile Version 3.0\n";
    out << "dielectric reconstruction\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << vol.n << " " << vol.n << " " << vol.n << "\n";
    out << "ORIGIN " << -vol.radius << " " << -vol.radius << " " << -vol.radius << "\n";
    out << "SPACING " << vol.h() << " " << vol.h() << " " << vol.h() << "\n";
    out << "POINT_DATA " << vol.values.size() << "\n";
    out << "SCALARS eps_r double 1\n";
    out << "LOOKUP_TABLE default\n";
    out.precision(9);
    for (size_t i = 0; i < vol.values.size(); ++i)
        out << vol.values[i] << ((i + 1) % 6 == 0 ? "\n" : " ");
    out << "\n";
}

void save_cross_section_csv(const CrossSection& cs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_cross_section_csv: cannot write " + path);
    out.precision(9);
    out << "# axis " << cs.axis << " value " << cs.value << "\n";
    for (int r = 0; r < cs.n; ++r) {
        for (int c = 0; c < cs.n; ++c)
            out << cs.values[static_cast<size_t>(r) * cs.n + c] << (c + 1 < cs.n ? "," : "\n");
    }
    if (!cs.outline.empty()) {
        out << "# outline\n";
        for (const auto& p : cs.outline) out << p[0] << "," << p[1] << "\n";
    }
}

}  // namespace sarcvx
