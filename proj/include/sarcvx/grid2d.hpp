#pragma once

#include <cstddef>
#include <vector>

#include "sarcvx/errors.hpp"

namespace sarcvx {

// Scalar function on the uniform grid of the rectangle (0, b) x (0, T); the
// first axis is the travel-time variable Y, the second the pseudo-time tau.
// Storage is Y-contiguous.
struct GridFunction2D {
    int ny = 0, nt = 0;
    double dy = 0.0, dtau = 0.0;
    std::vector<double> v;

    GridFunction2D() = default;
    GridFunction2D(int ny_, int nt_, double dy_, double dtau_)
        : ny(ny_), nt(nt_), dy(dy_), dtau(dtau_),
          v(static_cast<size_t>(ny_) * nt_, 0.0) {}

    size_t idx(int iy, int it) const { return static_cast<size_t>(it) * ny + iy; }
    double at(int iy, int it) const { return v[idx(iy, it)]; }
    double& at(int iy, int it) { return v[idx(iy, it)]; }

    double y(int iy) const { return dy * iy; }
    double tau(int it) const { return dtau * it; }
    double y_max() const { return dy * (ny - 1); }
    double tau_max() const { return dtau * (nt - 1); }
    size_t size() const { return v.size(); }

    bool same_grid(const GridFunction2D& o) const {
        return ny == o.ny && nt == o.nt && dy == o.dy && dtau == o.dtau;
    }
};

}  // namespace sarcvx
