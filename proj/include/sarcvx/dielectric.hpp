#pragma once

#include <string>
#include <vector>

#include "sarcvx/geometry.hpp"

namespace sarcvx {

// Relative dielectric constant sampled on a uniform grid over the cube
// (-R, R)^3. Air (value 1) above z = 0, sand (value >= 4) below, with a
// two-cell cosine ramp just under the interface so the field stays smooth.
class DielectricField {
  public:
    DielectricField(double radius, int n);

    int n() const { return n_; }
    double radius() const { return radius_; }
    double h() const { return h_; }

    double coord(int i) const { return -radius_ + h_ * i; }
    size_t idx(int i, int j, int k) const {
        return static_cast<size_t>((k * n_ + j) * n_ + i);
    }
    double at(int i, int j, int k) const { return values_[idx(i, j, k)]; }
    double& at(int i, int j, int k) { return values_[idx(i, j, k)]; }

    const std::vector<double>& values() const { return values_; }

    // Trilinear sample at an arbitrary point, clamped to the grid.
    double sample(const Vec3& p) const;

    void validate() const;

  private:
    double radius_;
    int n_;
    double h_;
    std::vector<double> values_;
};

// Layered background: 1 in the air, sand_eps from two cells below the
// interface downward, cosine ramp between. Used both as the reference medium
// and as the canvas the targets are painted onto.
DielectricField make_background(double radius, int n, double sand_eps);

// Buried ellipsoid, semi-axes (ax, ay, az), constant eps_inside, two-cell
// cosine taper at the surface (nominal surface is the 50% level).
DielectricField make_ellipsoid_model(double radius, int n, double sand_eps, Vec3 center,
                                     Vec3 semi_axes, double eps_inside);

// Buried rectangular prism with full dimensions (lx, ly, lz).
DielectricField make_prism_model(double radius, int n, double sand_eps, Vec3 center,
                                 Vec3 dimensions, double eps_inside);

// Raw little-endian doubles with a JSON header, see assembly.cpp for the
// matching volume writer.
DielectricField load_field(const std::string& path);
void save_field(const DielectricField& f, const std::string& path);

}  // namespace sarcvx
