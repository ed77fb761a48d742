#include "sarcvx/record.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

namespace sarcvx {

void save_records(const RecordSet& rs, const std::string& path, const std::string& meta_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_records: cannot write " + path);
    uint32_t j0 = static_cast<uint32_t>(rs.lines);
    uint32_t n = static_cast<uint32_t>(rs.per_line);
    uint32_t nt = static_cast<uint32_t>(rs.nt);
    out.write(reinterpret_cast<const char*>(&j0), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&nt), 4);
    out.write(reinterpret_cast<const char*>(&rs.dt), 8);
    out.write(reinterpret_cast<const char*>(rs.samples.data()),
              static_cast<std::streamsize>(rs.samples.size() * sizeof(double)));
    if (!out) throw IoError("save_records: write failed for " + path);
    std::ofstream meta(path + ".json");
    if (!meta) throw IoError("save_records: cannot write sidecar for " + path);
    meta << meta_json << "\n";
}

RecordSet load_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_records: cannot open " + path);
    uint32_t j0 = 0, n = 0, nt = 0;
    double dt = 0.0;
    in.read(reinterpret_cast<char*>(&j0), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&nt), 4);
    in.read(reinterpret_cast<char*>(&dt), 8);
    if (!in) throw IoError("load_records: bad header in " + path);
    RecordSet rs;
    rs.resize(static_cast<int>(j0), static_cast<int>(n), static_cast<int>(nt), dt);
    in.read(reinterpret_cast<char*>(rs.samples.data()),
            static_cast<std::streamsize>(rs.samples.size() * sizeof(double)));
    if (!in) throw IoError("load_records: truncated data in " + path);
    return rs;
}

std::string load_records_meta(const std::string& path) {
    std::ifstream meta(path + ".json");
    if (!meta) return "";
    std::string all((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
    return all;
}

void export_records_csv(const RecordSet& rs, int line, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("export_records_csv: cannot write " + path);
    out.precision(12);
    out << "tau";
    for (int m = 0; m < rs.per_line; ++m) out << ",m" << m;
    out << "\n";
    for (int k = 0; k < rs.nt; ++k) {
        out << rs.dt * k;
        for (int m = 0; m < rs.per_line; ++m) out << "," << rs.trace(line, m)[k];
        out << "\n";
    }
}

RecordSet reference_subtract(const RecordSet& with_object, const RecordSet& reference) {
    if (with_object.lines != reference.lines || with_object.per_line != reference.per_line ||
        with_object.nt != reference.nt || with_object.dt != reference.dt)
        throw SimulationError("reference_subtract: sampling mismatch");
    RecordSet out = with_object;
    for (size_t k = 0; k < out.samples.size(); ++k) out.samples[k] -= reference.samples[k];
    return out;
}

double first_bump_time(const std::vector<double>& samples, double dt, double fraction) {
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::abs(s));
    if (peak <= 0.0) return 0.0;
    size_t i = 0;
    while (i < samples.size() && std::abs(samples[i]) < fraction * peak) ++i;
    while (i + 1 < samples.size() && std::abs(samples[i + 1]) >= std::abs(samples[i])) ++i;
    return dt * static_cast<double>(i);
}

}  // namespace sarcvx
