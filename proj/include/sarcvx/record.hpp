#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sarcvx/errors.hpp"

namespace sarcvx {

// Backscatter trace of one source position: u(x0, x0, t) on a uniform time
// grid over [0, T].
struct TimeSeriesRecord {
    int line = 0;    // source line index j, 0-based
    int source = 0;  // position index m on the line, 0-based
    double dt = 0.0;
    std::vector<double> samples;

    double t_max() const { return dt * (samples.empty() ? 0 : samples.size() - 1); }
    void check_finite() const {
        for (double s : samples)
            if (!std::isfinite(s)) throw SimulationError("record contains non-finite samples");
    }
};

// All traces of an acquisition, line-major.
struct RecordSet {
    int lines = 0;
    int per_line = 0;
    int nt = 0;
    double dt = 0.0;
    std::vector<double> samples;  // [(j * per_line + m) * nt + k]

    double* trace(int j, int m) {
        return samples.data() + (static_cast<size_t>(j) * per_line + m) * nt;
    }
    const double* trace(int j, int m) const {
        return samples.data() + (static_cast<size_t>(j) * per_line + m) * nt;
    }
    std::vector<double> trace_copy(int j, int m) const {
        const double* p = trace(j, m);
        return std::vector<double>(p, p + nt);
    }
    void resize(int lines_, int per_line_, int nt_, double dt_) {
        lines = lines_;
        per_line = per_line_;
        nt = nt_;
        dt = dt_;
        samples.assign(static_cast<size_t>(lines) * per_line * nt, 0.0);
    }
};

// Columnar little-endian binary: header j0, N, N_t as u32 plus dt as f64,
// then all traces as f64 in line-major order. A JSON sidecar with the same
// stem carries run metadata.
void save_records(const RecordSet& rs, const std::string& path, const std::string& meta_json);
RecordSet load_records(const std::string& path);
std::string load_records_meta(const std::string& path);

// One trace per column, tau in the first column.
void export_records_csv(const RecordSet& rs, int line, const std::string& path);

// Difference of coincident acquisitions, u_scattered = u_total - u_reference.
RecordSet reference_subtract(const RecordSet& with_object, const RecordSet& reference);

// Time of the first prominent lobe of |trace|: first local maximum after the
// signal first exceeds the given fraction of its global maximum.
double first_bump_time(const std::vector<double>& samples, double dt, double fraction = 0.5);

}  // namespace sarcvx
