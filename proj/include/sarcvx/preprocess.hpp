#pragma once

#include <string>
#include <vector>

#include "sarcvx/config.hpp"
#include "sarcvx/line1d.hpp"
#include "sarcvx/record.hpp"

namespace sarcvx {

// Delay-and-sum image on one slant-range plane. Columns follow the source
// positions of the line, rows are the range axis y_s = tau / 2.
struct SlantRangeData {
    int line = 0;
    std::vector<double> xs;  // column coordinates (source x positions)
    double dys = 0.0;        // row spacing; rows start at y_s = 0
    int nys = 0;
    std::vector<double> values;  // idx = col * nys + row

    // truncation rectangle [s1,s2] x [l1,l2], inclusive indices; valid only
    // after truncate_sad
    bool truncated = false;
    int s1 = 0, s2 = -1, l1 = 0, l2 = -1;

    double at(int col, int row) const { return values[static_cast<size_t>(col) * nys + row]; }
    double& at(int col, int row) { return values[static_cast<size_t>(col) * nys + row]; }
    int cols() const { return static_cast<int>(xs.size()); }
    double ys(int row) const { return dys * row; }

    // rectangle extents in physical units
    double x_extent() const { return truncated ? xs[s2] - xs[s1] : 0.0; }
    double ys_lo() const { return ys(l1); }
    double ys_hi() const { return ys(l2); }
};

// Per-line traces; index m matches the source position on the line.
using LineRecords = std::vector<std::vector<double>>;

// Zeroes every sample smaller than 10% of the largest magnitude across the
// whole line.
LineRecords threshold_small_peaks(const LineRecords& records);

// Keeps the first two lobes of |signal|: peaks are local maxima above 10% of
// the record's maximum, at least 5 samples apart; a lobe ends where the
// magnitude falls under 5% of its peak. Records with at most two peaks pass
// through unchanged.
std::vector<double> keep_first_two_peaks(const std::vector<double>& record);

// Additive uniform noise scaled by the global maximum magnitude,
// deterministic in (seed, line, record, sample).
std::vector<LineRecords> add_noise(const std::vector<LineRecords>& lines, double sigma,
                                   unsigned long long seed);

// Coherent sum over sources with round-trip delays at unit speed, times the
// calibration factor.
SlantRangeData delay_and_sum(const LineRecords& records, const SourceLine& line, int line_index,
                             double dt, double cal_factor);

// Keeps values within 5% of the maximum magnitude and records their bounding
// rectangle; throws EmptyDetectionError when nothing survives.
SlantRangeData truncate_sad(const SlantRangeData& sad);

// g0(tau) = |truncated SAD| along the column of source m, resampled onto the
// tau-grid through y_s = tau/2; g1 = g0'. Returns zero data when the source
// column lies outside the truncation rectangle.
BoundaryData1D extract_boundary_data(const SlantRangeData& sad, int m, double dtau, int nt,
                                     bool smooth);

void save_sad_csv(const SlantRangeData& sad, const std::string& path);
std::string sad_meta_json(const SlantRangeData& sad);

}  // namespace sarcvx
