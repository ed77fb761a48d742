#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sarcvx/errors.hpp"

namespace sarcvx {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
};

// One line of coincident source/receiver positions, parallel to the x-axis.
struct SourceLine {
    double y0 = 0.0;          // line offset in y
    double z0 = 0.0;          // antenna height, shared by all lines
    int count = 0;            // number of source positions on the line
    double half_extent = 0.0; // positions span (-half_extent, half_extent) in x

    // Source positions are placed uniformly across the open interval,
    // endpoints included in the sweep.
    double position_x(int m) const {
        if (count == 1) return 0.0;
        return -half_extent + 2.0 * half_extent * static_cast<double>(m) / (count - 1);
    }
    Vec3 position(int m) const { return {position_x(m), y0, z0}; }
};

struct AcquisitionGeometry {
    std::vector<SourceLine> lines;
    double line_spacing = 0.0;     // y-distance between consecutive lines
    double elevation_angle = 0.0;  // antenna tilt, radians in (0, pi/2)

    int line_count() const { return static_cast<int>(lines.size()); }

    void validate() const {
        if (lines.empty()) throw ConfigError("geometry: no source lines");
        if (!(elevation_angle > 0.0 && elevation_angle < M_PI / 2.0))
            throw ConfigError("geometry: elevation angle must lie in (0, pi/2)");
        const double z0 = lines.front().z0;
        const double ext = lines.front().half_extent;
        for (const auto& l : lines) {
            if (!(l.z0 > 0.0)) throw ConfigError("geometry: source height must be positive");
            if (l.z0 != z0) throw ConfigError("geometry: all lines must share one height");
            if (l.half_extent != ext) throw ConfigError("geometry: all lines must share the x-interval");
            if (l.count < 1) throw ConfigError("geometry: each line needs at least one source");
        }
    }
};

// Downward ray through a source position, orthogonal to the x-axis, making
// the elevation angle with the vertical plane {y = y0}.
struct Ray3 {
    Vec3 origin;
    Vec3 direction;  // unit vector, zero x-component

    Vec3 at(double s) const { return origin + direction * s; }
};

inline Ray3 central_line(const Vec3& source, double elevation_angle) {
    if (!(elevation_angle > 0.0 && elevation_angle < M_PI / 2.0))
        throw ConfigError("central_line: elevation angle must lie in (0, pi/2)");
    return {source, {0.0, std::sin(elevation_angle), -std::cos(elevation_angle)}};
}

}  // namespace sarcvx
