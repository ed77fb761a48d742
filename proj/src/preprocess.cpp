#include "sarcvx/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "sarcvx/stencils.hpp"

namespace sarcvx {

LineRecords threshold_small_peaks(const LineRecords& records) {
    if (records.empty()) throw SolverError("threshold_small_peaks: empty record set");
    double peak = 0.0;
    for (const auto& rec : records)
        for (double s : rec) peak = std::max(peak, std::abs(s));
    LineRecords out = records;
    if (peak == 0.0) return out;
    const double cut = 0.1 * peak;
    for (auto& rec : out)
        for (double& s : rec)
            if (std::abs(s) < cut) s = 0.0;
    return out;
}

namespace {

struct Peak {
    int index;
    double height;  // |signal| at the peak
};

std::vector<Peak> find_peaks(const std::vector<double>& rec, double min_height, int min_sep) {
    std::vector<Peak> peaks;
    int n = static_cast<int>(rec.size());
    for (int i = 1; i + 1 < n; ++i) {
        double a = std::abs(rec[i]);
        if (a < min_height) continue;
        if (a >= std::abs(rec[i - 1]) && a > std::abs(rec[i + 1])) {
            if (!peaks.empty() && i - peaks.back().index < min_sep) {
                if (a > peaks.back().height) peaks.back() = {i, a};
                continue;
            }
            peaks.push_back({i, a});
        }
    }
    return peaks;
}

}  // namespace

std::vector<double> keep_first_two_peaks(const std::vector<double>& record) {
    double peak = 0.0;
    for (double s : record) peak = std::max(peak, std::abs(s));
    if (peak == 0.0) return record;
    std::vector<Peak> peaks = find_peaks(record, 0.1 * peak, 5);
    if (peaks.size() <= 2) return record;
    // end of the second lobe: first sample after the peak below 5% of it
    int cut = peaks[1].index;
    int n = static_cast<int>(record.size());
    while (cut < n && std::abs(record[cut]) >= 0.05 * peaks[1].height) ++cut;
    std::vector<double> out = record;
    for (int i = cut; i < n; ++i) out[static_cast<size_t>(i)] = 0.0;
    return out;
}

std::vector<LineRecords> add_noise(const std::vector<LineRecords>& lines, double sigma,
                                   unsigned long long seed) {
    if (!(sigma >= 0.0 && sigma < 1.0)) throw ConfigError("add_noise: sigma must lie in [0, 1)");
    std::vector<LineRecords> out = lines;
    if (sigma == 0.0) return out;
    double peak = 0.0;
    for (const auto& line : lines)
        for (const auto& rec : line)
            for (double s : rec) peak = std::max(peak, std::abs(s));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& line : out)
        for (auto& rec : line)
            for (double& s : rec) s += sigma * uni(rng) * peak;
    return out;
}

SlantRangeData delay_and_sum(const LineRecords& records, const SourceLine& line, int line_index,
                             double dt, double cal_factor) {
    if (static_cast<int>(records.size()) != line.count)
        throw SolverError("delay_and_sum: need one record per source position");
    size_t nt = records.front().size();
    for (const auto& rec : records)
        if (rec.size() != nt) throw SolverError("delay_and_sum: records must share sampling");

    SlantRangeData sad;
    sad.line = line_index;
    sad.nys = static_cast<int>(nt);
    sad.dys = 0.5 * dt;  // y_s = tau / 2
    sad.xs.resize(static_cast<size_t>(line.count));
    for (int m = 0; m < line.count; ++m) sad.xs[static_cast<size_t>(m)] = line.position_x(m);
    sad.values.assign(static_cast<size_t>(line.count) * sad.nys, 0.0);

    for (int col = 0; col < line.count; ++col) {
        double xc = sad.xs[static_cast<size_t>(col)];
        for (int row = 0; row < sad.nys; ++row) {
            double ysq = sad.ys(row);
            double acc = 0.0;
            for (int m = 0; m < line.count; ++m) {
                double dx = xc - sad.xs[static_cast<size_t>(m)];
                double delay = 2.0 * std::sqrt(dx * dx + ysq * ysq);
                double pos = delay / dt;
                size_t i = static_cast<size_t>(pos);
                if (i + 1 >= nt) continue;
                double w = pos - static_cast<double>(i);
                const auto& rec = records[static_cast<size_t>(m)];
                acc += rec[i] * (1.0 - w) + rec[i + 1] * w;
            }
            sad.at(col, row) = cal_factor * acc;
        }
    }
    return sad;
}

SlantRangeData truncate_sad(const SlantRangeData& sad) {
    double peak = 0.0;
    for (double v : sad.values) peak = std::max(peak, std::abs(v));
    SlantRangeData out = sad;
    if (peak == 0.0) throw EmptyDetectionError("truncate_sad: image is identically zero");
    const double cut = 0.95 * peak;
    out.s1 = sad.cols();
    out.s2 = -1;
    out.l1 = sad.nys;
    out.l2 = -1;
    for (int col = 0; col < sad.cols(); ++col)
        for (int row = 0; row < sad.nys; ++row) {
            if (sad.at(col, row) >= cut) {
                out.s1 = std::min(out.s1, col);
                out.s2 = std::max(out.s2, col);
                out.l1 = std::min(out.l1, row);
                out.l2 = std::max(out.l2, row);
            } else {
                out.at(col, row) = 0.0;
            }
        }
    if (out.s2 < out.s1) throw EmptyDetectionError("truncate_sad: no values meet the 95% level");
    out.truncated = true;
    return out;
}

BoundaryData1D extract_boundary_data(const SlantRangeData& sad, int m, double dtau, int nt,
                                     bool smooth) {
    if (!sad.truncated) throw SolverError("extract_boundary_data: SAD is not truncated yet");
    BoundaryData1D g;
    g.dt = dtau;
    g.g0.assign(static_cast<size_t>(nt), 0.0);
    g.g1.assign(static_cast<size_t>(nt), 0.0);
    if (m < sad.s1 || m > sad.s2) return g;  // skipped source

    std::vector<double> column(static_cast<size_t>(sad.nys));
    for (int row = 0; row < sad.nys; ++row)
        column[static_cast<size_t>(row)] = std::abs(sad.at(m, row));
    for (int k = 0; k < nt; ++k) {
        double ysq = 0.5 * dtau * k;  // y_s of this tau sample
        double pos = ysq / sad.dys;
        size_t i = static_cast<size_t>(pos);
        if (i + 1 >= column.size()) break;
        double w = pos - static_cast<double>(i);
        g.g0[static_cast<size_t>(k)] = column[i] * (1.0 - w) + column[i + 1] * w;
    }
    if (smooth) g.g0 = moving_average5(g.g0);
    g.g1 = deriv1(g.g0, dtau);
    g.direct_level = 0.0;  // scattered-field data carry no direct arrival
    return g;
}

void save_sad_csv(const SlantRangeData& sad, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_sad_csv: cannot write " + path);
    out.precision(12);
    out << "ys";
    for (int col = 0; col < sad.cols(); ++col) out << ",x" << sad.xs[static_cast<size_t>(col)];
    out << "\n";
    for (int row = 0; row < sad.nys; ++row) {
        out << sad.ys(row);
        for (int col = 0; col < sad.cols(); ++col) out << "," << sad.at(col, row);
        out << "\n";
    }
}

std::string sad_meta_json(const SlantRangeData& sad) {
    nlohmann::json j{{"line", sad.line},
                     {"columns", sad.cols()},
                     {"rows", sad.nys},
                     {"dys", sad.dys},
                     {"truncated", sad.truncated}};
    if (sad.truncated) {
        j["rect"] = {{"s1", sad.s1}, {"s2", sad.s2}, {"l1", sad.l1}, {"l2", sad.l2}};
        j["rect_x"] = {sad.xs[static_cast<size_t>(sad.s1)], sad.xs[static_cast<size_t>(sad.s2)]};
        j["rect_ys"] = {sad.ys_lo(), sad.ys_hi()};
    }
    return j.dump(2);
}

}  // namespace sarcvx
