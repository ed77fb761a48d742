#pragma once

#include <array>
#include <string>
#include <vector>

#include "sarcvx/config.hpp"
#include "sarcvx/preprocess.hpp"

namespace sarcvx {

// Reconstructed dielectric image on one slant-range plane: per-source
// profiles, their clamped per-source scalars, and the averaged image that is
// constant inside the truncation rectangle and 1 elsewhere.
struct SlantRangeImage {
    int line = 0;
    std::vector<double> xs;
    double dys = 0.0;
    int nys = 0;
    int s1 = 0, s2 = -1, l1 = 0, l2 = -1;
    std::vector<double> raw;         // per-column profiles over y_s, idx = col * nys + row
    std::vector<double> per_source;  // clamped scalars per column (1 outside the rectangle)
    double inside_value = 1.0;       // averaged value inside the rectangle
    double eps_max = 1.0;            // max over the plane image

    double raw_at(int col, int row) const { return raw[static_cast<size_t>(col) * nys + row]; }
    double image_at(int col, int row) const {
        bool inside = col >= s1 && col <= s2 && row >= l1 && row <= l2;
        return inside ? inside_value : 1.0;
    }
};

// Scalar selected from one reconstructed profile: the maximum magnitude over
// the rectangle rows, replaced by 30 when it exceeds 500 (the physically
// meaningful range of the sought constant is [10, 30]).
double clamp_profile(const std::vector<double>& column);

// Plane image per the averaging rule: arithmetic mean of the per-source
// scalars whose positions fall inside [s1, s2], painted across the rectangle.
SlantRangeImage average_plane(const SlantRangeData& truncated_sad,
                              const std::vector<double>& per_source_scalar);

struct VolumeImage {
    double radius = 0.0;
    int n = 0;
    std::vector<double> values;
    double fused_value = 1.0;
    std::array<double, 3> box_min{0, 0, 0};  // bounding box of the nonunit support
    std::array<double, 3> box_max{0, 0, 0};
    bool has_support = false;

    double h() const { return 2.0 * radius / (n - 1); }
    double coord(int i) const { return -radius + h() * i; }
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(k) * n + j) * n + i;
    }
    double at(int i, int j, int k) const { return values[idx(i, j, k)]; }
};

// Fuses the three plane images: the value is the mean of the plane maxima on
// the prism swept by the truncation rectangles (with half-a-spacing margins
// and linear interpolation across planes), 1 elsewhere. Travel-time ranges
// are converted to geometric distances with the layered speed profile.
VolumeImage fuse_volume(const std::vector<SlantRangeImage>& images,
                        const AcquisitionGeometry& geometry, double radius, int n,
                        double sand_eps);

struct CrossSection {
    char axis = 'y';
    double value = 0.0;
    int n = 0;
    std::vector<double> values;            // idx = row * n + col on the slice plane
    std::vector<std::array<double, 2>> outline;  // true-object outline, may be empty
};

// Axis-aligned slice with linear interpolation along the cut axis.
CrossSection cross_section(const VolumeImage& vol, char axis, double value);

void save_volume(const VolumeImage& vol, const std::string& path, const std::string& meta_json);
VolumeImage load_volume(const std::string& path);
void export_volume_vtk(const VolumeImage& vol, const std::string& path);
void save_cross_section_csv(const CrossSection& cs, const std::string& path);

}  // namespace sarcvx
