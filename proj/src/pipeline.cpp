#include "sarcvx/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sarcvx/fdtd.hpp"
#include "sarcvx/parallel.hpp"
#include "sarcvx/preprocess.hpp"
#include "sarcvx/solver.hpp"
#include "sarcvx/transform.hpp"

namespace fs = std::filesystem;

namespace sarcvx {

namespace {

const std::vector<std::string> kStages = {"simulate", "preprocess", "invert", "assemble"};

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_text(const PipelineConfig& cfg) {
    fs::path tmp = fs::temp_directory_path() /
                   ("sarcvx_cfg_" + std::to_string(
                                        std::chrono::steady_clock::now().time_since_epoch().count()));
    write_config(cfg, tmp.string());
    std::ifstream in(tmp);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    fs::remove(tmp);
    return text;
}

// signature of everything that shapes the reference acquisition
std::string reference_signature(const PipelineConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << cfg.domain_radius << "|" << cfg.nx << "|" << cfg.sim_time << "|" << cfg.nt << "|"
       << static_cast<int>(cfg.scheme) << "|" << cfg.sand_eps << "|" << cfg.pulse.omega0 << "|"
       << cfg.pulse.alpha0 << "|" << cfg.pulse.tau0 << "|" << cfg.pulse.disk_radius << "|"
       << cfg.pulse.disk_thickness << "|" << cfg.geometry.elevation_angle << "|"
       << cfg.geometry.line_spacing;
    for (const auto& l : cfg.geometry.lines)
        os << "|" << l.y0 << "," << l.z0 << "," << l.count << "," << l.half_extent;
    return std::to_string(fnv1a(os.str()));
}

struct StageTimer {
    std::vector<std::pair<std::string, double>> entries;
    void add(const std::string& name, double seconds) { entries.emplace_back(name, seconds); }
};

struct PipelineState {
    RunManifest manifest;
    PipelineConfig cfg;
    std::string signature;
    fs::path out;

    std::optional<RecordSet> rec_scattered;  // after reference subtraction
    std::vector<SlantRangeData> tsads;
    std::vector<std::vector<double>> eps2;  // per line, per source
    std::vector<int> solver_iters;          // per line
    std::optional<VolumeImage> volume;
    double travel_observed = 0.0;
    double travel_geometric = 0.0;
    StageTimer timer;
};

Vec3 builtin_center() { return {0.0, 0.0, -0.14}; }

bool is_builtin(const std::string& name) { return name == "ellipsoid" || name == "prism"; }

// ---- stage artifacts -------------------------------------------------------

void save_sads(const PipelineState& st, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    nlohmann::json hdr;
    hdr["signature"] = st.signature;
    hdr["planes"] = nlohmann::json::array();
    for (const auto& sad : st.tsads) {
        nlohmann::json p{{"line", sad.line}, {"cols", sad.cols()}, {"rows", sad.nys},
                         {"dys", sad.dys},   {"s1", sad.s1},       {"s2", sad.s2},
                         {"l1", sad.l1},     {"l2", sad.l2},       {"xs", sad.xs}};
        hdr["planes"].push_back(p);
    }
    hdr["travel_observed"] = st.travel_observed;
    hdr["travel_geometric"] = st.travel_geometric;
    out << hdr.dump() << "\n";
    for (const auto& sad : st.tsads)
        out.write(reinterpret_cast<const char*>(sad.values.data()),
                  static_cast<std::streamsize>(sad.values.size() * sizeof(double)));
}

bool load_sads(PipelineState& st, const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    nlohmann::json hdr = nlohmann::json::parse(line, nullptr, false);
    if (hdr.is_discarded() || hdr.value("signature", "") != st.signature) return false;
    st.tsads.clear();
    for (const auto& p : hdr["planes"]) {
        SlantRangeData sad;
        sad.line = p.at("line").get<int>();
        sad.nys = p.at("rows").get<int>();
        sad.dys = p.at("dys").get<double>();
        sad.s1 = p.at("s1").get<int>();
        sad.s2 = p.at("s2").get<int>();
        sad.l1 = p.at("l1").get<int>();
        sad.l2 = p.at("l2").get<int>();
        sad.truncated = true;
        sad.xs = p.at("xs").get<std::vector<double>>();
        sad.values.resize(static_cast<size_t>(sad.cols()) * sad.nys);
        st.tsads.push_back(std::move(sad));
    }
    for (auto& sad : st.tsads) {
        in.read(reinterpret_cast<char*>(sad.values.data()),
                static_cast<std::streamsize>(sad.values.size() * sizeof(double)));
        if (!in) return false;
    }
    st.travel_observed = hdr.value("travel_observed", 0.0);
    st.travel_geometric = hdr.value("travel_geometric", 0.0);
    return true;
}

void save_inversion(const PipelineState& st, const fs::path& path) {
    nlohmann::json j;
    j["signature"] = st.signature;
    j["eps2"] = st.eps2;
    j["solver_iterations"] = st.solver_iters;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

bool load_inversion(PipelineState& st, const fs::path& path) {
    std::ifstream in(path);
    if (!in) return false;
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || j.value("signature", "") != st.signature) return false;
    st.eps2 = j.at("eps2").get<std::vector<std::vector<double>>>();
    st.solver_iters = j.at("solver_iterations").get<std::vector<int>>();
    return true;
}

// ---- stages ----------------------------------------------------------------

void stage_simulate(PipelineState& st) {
    auto t0 = std::chrono::steady_clock::now();
    const PipelineConfig& cfg = st.cfg;
    fs::path model_path = st.out / "records_model.bin";
    fs::path ref_path = st.out / "records_reference.bin";

    auto meta_matches = [&](const fs::path& p, const std::string& key, const std::string& want) {
        std::string meta = load_records_meta(p.string());
        if (meta.empty()) return false;
        nlohmann::json j = nlohmann::json::parse(meta, nullptr, false);
        return !j.is_discarded() && j.value(key, "") == want;
    };

    bool have_model = fs::exists(model_path) && meta_matches(model_path, "signature", st.signature);
    bool have_ref = fs::exists(ref_path) &&
                    meta_matches(ref_path, "reference_signature", reference_signature(cfg));

    if (!have_ref && !st.manifest.reference_records.empty()) {
        fs::path src(st.manifest.reference_records);
        if (fs::exists(src) &&
            meta_matches(src, "reference_signature", reference_signature(cfg))) {
            fs::copy_file(src, ref_path, fs::copy_options::overwrite_existing);
            fs::copy_file(src.string() + ".json", ref_path.string() + ".json",
                          fs::copy_options::overwrite_existing);
            have_ref = true;
        } else {
            std::cerr << "note: supplied reference records do not match this setup; "
                         "regenerating\n";
        }
    }

    if (!have_model) {
        DielectricField medium = make_model(st.manifest.model, cfg);
        RecordSet rs = simulate_all(medium, cfg.geometry, cfg.pulse, cfg.sim_time, cfg.nt,
                                    cfg.scheme, cfg.workers);
        nlohmann::json meta{{"signature", st.signature},
                            {"model", st.manifest.model},
                            {"scheme", cfg.scheme == TimeScheme::Implicit ? "implicit" : "explicit"}};
        save_records(rs, model_path.string(), meta.dump(2));
    }
    if (!have_ref) {
        DielectricField ref = make_background(cfg.domain_radius, cfg.nx, cfg.sand_eps);
        RecordSet rs = simulate_all(ref, cfg.geometry, cfg.pulse, cfg.sim_time, cfg.nt,
                                    cfg.scheme, cfg.workers);
        nlohmann::json meta{{"reference_signature", reference_signature(cfg)},
                            {"signature", st.signature}};
        save_records(rs, ref_path.string(), meta.dump(2));
    }
    st.timer.add("simulate",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

void ensure_scattered(PipelineState& st) {
    if (st.rec_scattered) return;
    fs::path model_path = st.out / "records_model.bin";
    fs::path ref_path = st.out / "records_reference.bin";
    if (!fs::exists(model_path) || !fs::exists(ref_path))
        throw ConfigError("preprocess: no simulation artifacts in " + st.out.string() +
                          "; run the simulate stage first");
    RecordSet with_object = load_records(model_path.string());
    RecordSet reference = load_records(ref_path.string());
    st.rec_scattered = reference_subtract(with_object, reference);
}

void stage_preprocess(PipelineState& st) {
    auto t0 = std::chrono::steady_clock::now();
    const PipelineConfig& cfg = st.cfg;
    fs::path sad_path = st.out / "sad.bin";
    if (load_sads(st, sad_path)) {
        st.timer.add("preprocess", 0.0);
        return;
    }
    ensure_scattered(st);
    const RecordSet& sc = *st.rec_scattered;

    // travel-time diagnostic from the raw scattered trace nearest to x = 0
    int jc = sc.lines / 2;
    int mc = 0;
    {
        const SourceLine& line = cfg.geometry.lines[static_cast<size_t>(jc)];
        double best = 1e300;
        for (int m = 0; m < line.count; ++m)
            if (std::abs(line.position_x(m)) < best) {
                best = std::abs(line.position_x(m));
                mc = m;
            }
    }
    st.travel_observed = first_bump_time(sc.trace_copy(jc, mc), sc.dt);
    if (is_builtin(st.manifest.model)) {
        Vec3 src = cfg.geometry.lines[static_cast<size_t>(jc)].position(mc);
        st.travel_geometric = 2.0 * (src - builtin_center()).norm();
    }

    std::vector<LineRecords> lines(static_cast<size_t>(sc.lines));
    for (int j = 0; j < sc.lines; ++j) {
        LineRecords lr(static_cast<size_t>(sc.per_line));
        for (int m = 0; m < sc.per_line; ++m) lr[static_cast<size_t>(m)] = sc.trace_copy(j, m);
        lines[static_cast<size_t>(j)] = threshold_small_peaks(lr);
    }
    double sigma = cfg.noise_sigma;
    if (sigma > 0.0) lines = add_noise(lines, sigma, cfg.seed);
    for (auto& lr : lines)
        for (auto& rec : lr) rec = keep_first_two_peaks(rec);

    st.tsads.clear();
    for (int j = 0; j < sc.lines; ++j) {
        SlantRangeData sad = delay_and_sum(lines[static_cast<size_t>(j)],
                                           cfg.geometry.lines[static_cast<size_t>(j)], j, sc.dt,
                                           cfg.cal_factor);
        st.tsads.push_back(truncate_sad(sad));
    }
    save_sads(st, sad_path);
    for (const auto& sad : st.tsads) {
        save_sad_csv(sad, (st.out / ("sad_line" + std::to_string(sad.line + 1) + ".csv")).string());
        std::ofstream meta(st.out / ("sad_line" + std::to_string(sad.line + 1) + ".json"));
        meta << sad_meta_json(sad) << "\n";
    }
    st.timer.add("preprocess",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

void ensure_sads(PipelineState& st) {
    if (!st.tsads.empty()) return;
    if (!load_sads(st, st.out / "sad.bin"))
        throw ConfigError("invert: no matching preprocess artifacts in " + st.out.string() +
                          "; run the preprocess stage first");
}

void stage_invert(PipelineState& st) {
    auto t0 = std::chrono::steady_clock::now();
    const PipelineConfig& cfg = st.cfg;
    fs::path inv_path = st.out / "inversion.json";
    if (load_inversion(st, inv_path)) {
        st.timer.add("invert", 0.0);
        return;
    }
    ensure_sads(st);

    const int ny = static_cast<int>(std::ceil(cfg.b / cfg.dy - 1e-12)) + 1;
    const int nt = static_cast<int>(std::ceil(cfg.t_tilde / cfg.dtau - 1e-12)) + 1;

    struct Task {
        int line;
        int source;
    };
    std::vector<Task> tasks;
    for (const auto& sad : st.tsads)
        for (int m = sad.s1; m <= sad.s2; ++m) tasks.push_back({sad.line, m});

    st.eps2.assign(st.tsads.size(), {});
    st.solver_iters.assign(st.tsads.size(), 0);
    for (const auto& sad : st.tsads)
        st.eps2[static_cast<size_t>(sad.line)].assign(sad.xs.size(), 1.0);

    std::vector<int> iters(tasks.size(), 0);
    std::vector<double> task_eps(tasks.size(), 1.0);

    SolverOptions base;
    base.lambda = cfg.lambda;
    base.alpha = cfg.alpha;
    base.gamma = cfg.gamma;
    base.reg_norm = cfg.reg_norm;
    base.metric = cfg.metric;
    base.neumann_order = cfg.neumann_order;
    base.step = cfg.descent_step;
    base.max_iters = cfg.max_iters;
    base.grad_tol = cfg.grad_tol;
    base.ball_radius_max = cfg.ball_radius_max;

    parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int q) {
        const Task& task = tasks[static_cast<size_t>(q)];
        const SlantRangeData& sad = st.tsads[static_cast<size_t>(task.line)];
        BoundaryData1D g = extract_boundary_data(sad, task.source, cfg.dtau, nt,
                                                 cfg.smooth_boundary_data);
        BvpData q01 = bvp_data_from_boundary(g, false);
        ConvexCostFunctional fun(ny, nt, cfg.dy, cfg.dtau, base);
        BoundaryConstraint bc{q01.q0, q01.q1, cfg.neumann_order};
        DescentState ds = fun.minimize(bc);
        PotentialProfile p = potential_from_solution(ds.V);
        std::vector<double> c_of_y = recover_coefficient_of_y(p);
        // profile column over the rectangle rows, sampled at Y = y_s
        std::vector<double> column;
        for (int row = sad.l1; row <= sad.l2; ++row) {
            double ysq = sad.ys(row);
            size_t i = static_cast<size_t>(std::clamp(ysq / cfg.dy, 0.0,
                                                      static_cast<double>(c_of_y.size() - 1)));
            column.push_back(c_of_y[i]);
        }
        task_eps[static_cast<size_t>(q)] = clamp_profile(column);
        iters[static_cast<size_t>(q)] = ds.iterations;
    });

    for (size_t q = 0; q < tasks.size(); ++q) {
        st.eps2[static_cast<size_t>(tasks[q].line)][static_cast<size_t>(tasks[q].source)] =
            task_eps[q];
        st.solver_iters[static_cast<size_t>(tasks[q].line)] += iters[q];
    }
    save_inversion(st, inv_path);
    st.timer.add("invert",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

void ensure_inversion(PipelineState& st) {
    if (!st.eps2.empty()) return;
    if (!load_inversion(st, st.out / "inversion.json"))
        throw ConfigError("assemble: no matching invert artifacts in " + st.out.string() +
                          "; run the invert stage first");
}

RunReport stage_assemble(PipelineState& st) {
    auto t0 = std::chrono::steady_clock::now();
    const PipelineConfig& cfg = st.cfg;
    ensure_sads(st);
    ensure_inversion(st);

    std::vector<SlantRangeImage> images;
    for (const auto& sad : st.tsads)
        images.push_back(average_plane(sad, st.eps2[static_cast<size_t>(sad.line)]));

    VolumeImage vol = fuse_volume(images, cfg.geometry, cfg.domain_radius, cfg.nx, cfg.sand_eps);

    RunReport rep;
    rep.model = st.manifest.model;
    rep.fused_eps = vol.fused_value;
    rep.noise_sigma = cfg.noise_sigma;
    rep.seed = cfg.seed;
    rep.signature = st.signature;
    rep.box_min = vol.box_min;
    rep.box_max = vol.box_max;
    rep.x_extent = vol.has_support ? vol.box_max[0] - vol.box_min[0] : 0.0;
    rep.travel_time_observed = st.travel_observed;
    rep.travel_time_geometric = st.travel_geometric;
    for (size_t i = 0; i < images.size(); ++i) {
        PlaneSummary ps;
        ps.line = images[i].line;
        ps.eps_max = images[i].eps_max;
        ps.inside_value = images[i].inside_value;
        ps.sources_inside = images[i].s2 - images[i].s1 + 1;
        ps.rect_x_lo = images[i].xs[static_cast<size_t>(images[i].s1)];
        ps.rect_x_hi = images[i].xs[static_cast<size_t>(images[i].s2)];
        ps.rect_ys_lo = images[i].dys * images[i].l1;
        ps.rect_ys_hi = images[i].dys * images[i].l2;
        ps.solver_iterations_total = st.solver_iters[i];
        rep.planes.push_back(ps);
    }

    save_volume(vol, (st.out / "volume.bin").string(),
                nlohmann::json{{"model", st.manifest.model}, {"signature", st.signature}}.dump());
    export_volume_vtk(vol, (st.out / "volume.vtk").string());

    CrossSection cs = cross_section(vol, 'y', 0.0);
    if (st.manifest.model == "ellipsoid") {
        // outline of the ellipsoid cut by {y = 0}: x-z ellipse
        for (int i = 0; i <= 64; ++i) {
            double a = 2.0 * M_PI * i / 64;
            cs.outline.push_back({builtin_center().x + 0.2 * std::cos(a),
                                  builtin_center().z + 0.04 * std::sin(a)});
        }
    } else if (st.manifest.model == "prism") {
        Vec3 c = builtin_center();
        cs.outline = {{c.x - 0.09, c.z - 0.04}, {c.x + 0.09, c.z - 0.04},
                      {c.x + 0.09, c.z + 0.04}, {c.x - 0.09, c.z + 0.04},
                      {c.x - 0.09, c.z - 0.04}};
    }
    save_cross_section_csv(cs, (st.out / "cross_section_y0.csv").string());

    std::ofstream rj(st.out / "report.json");
    if (!rj) throw IoError("cannot write report.json");
    rj << rep.to_json() << "\n";
    st.volume = std::move(vol);
    st.timer.add("assemble",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return rep;
}

void emit_plot_files(PipelineState& st) {
    ensure_scattered(st);
    const RecordSet& sc = *st.rec_scattered;
    int jc = sc.lines / 2;
    const SourceLine& line = st.cfg.geometry.lines[static_cast<size_t>(jc)];
    int mc = 0;
    double best = 1e300;
    for (int m = 0; m < line.count; ++m)
        if (std::abs(line.position_x(m)) < best) {
            best = std::abs(line.position_x(m));
            mc = m;
        }
    // raw trace
    {
        std::ofstream out(st.out / "plot_central_trace.csv");
        out.precision(12);
        out << "tau,raw,processed\n";
        LineRecords lr(static_cast<size_t>(sc.per_line));
        for (int m = 0; m < sc.per_line; ++m) lr[static_cast<size_t>(m)] = sc.trace_copy(jc, m);
        LineRecords th = threshold_small_peaks(lr);
        std::vector<double> proc = keep_first_two_peaks(th[static_cast<size_t>(mc)]);
        std::vector<double> raw = sc.trace_copy(jc, mc);
        for (int k = 0; k < sc.nt; ++k)
            out << sc.dt * k << "," << raw[static_cast<size_t>(k)] << ","
                << proc[static_cast<size_t>(k)] << "\n";
    }
    // all-source heatmap of the processed line records
    {
        std::ofstream out(st.out / "plot_line_records.csv");
        out.precision(12);
        export_records_csv(sc, jc, (st.out / "plot_line_records.csv").string());
    }
    // plane image of the middle line
    if (!st.tsads.empty() && !st.eps2.empty()) {
        const SlantRangeData& sad = st.tsads[static_cast<size_t>(jc)];
        SlantRangeImage img = average_plane(sad, st.eps2[static_cast<size_t>(jc)]);
        std::ofstream out(st.out / "plot_plane_image.csv");
        out.precision(12);
        out << "ys";
        for (int col = 0; col < sad.cols(); ++col) out << ",x" << sad.xs[static_cast<size_t>(col)];
        out << "\n";
        for (int row = 0; row < sad.nys; ++row) {
            out << sad.ys(row);
            for (int col = 0; col < sad.cols(); ++col) out << "," << img.image_at(col, row);
            out << "\n";
        }
    }
}

}  // namespace

std::string RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["fused_eps"] = fused_eps;
    j["noise_sigma"] = noise_sigma;
    j["seed"] = seed;
    j["signature"] = signature;
    j["travel_time"] = {{"observed", travel_time_observed}, {"geometric", travel_time_geometric}};
    j["box_min"] = box_min;
    j["box_max"] = box_max;
    j["x_extent"] = x_extent;
    j["planes"] = nlohmann::ordered_json::array();
    for (const auto& p : planes) {
        nlohmann::ordered_json pj;
        pj["line"] = p.line;
        pj["eps_max"] = p.eps_max;
        pj["inside_value"] = p.inside_value;
        pj["sources_inside"] = p.sources_inside;
        pj["rect_x"] = {p.rect_x_lo, p.rect_x_hi};
        pj["rect_ys"] = {p.rect_ys_lo, p.rect_ys_hi};
        pj["solver_iterations_total"] = p.solver_iterations_total;
        j["planes"].push_back(pj);
    }
    return j.dump(2);
}

DielectricField make_model(const std::string& name, const PipelineConfig& cfg) {
    if (name == "ellipsoid")
        return make_ellipsoid_model(cfg.domain_radius, cfg.nx, cfg.sand_eps, builtin_center(),
                                    {0.2, 0.12, 0.04}, 15.0);
    if (name == "prism")
        return make_prism_model(cfg.domain_radius, cfg.nx, cfg.sand_eps, builtin_center(),
                                {0.18, 0.08, 0.08}, 23.8);
    if (fs::exists(name)) return load_field(name);
    throw ConfigError("make_model: unknown model '" + name + "'");
}

std::string config_signature(const PipelineConfig& cfg, const std::string& model,
                             unsigned long long seed) {
    std::string text = config_text(cfg) + "|model=" + model + "|seed=" + std::to_string(seed);
    return std::to_string(fnv1a(text));
}

RunReport run_pipeline(const RunManifest& manifest) {
    PipelineState st;
    st.manifest = manifest;
    st.cfg = manifest.config_path.empty() ? default_config() : load_config(manifest.config_path);
    if (manifest.noise_sigma >= 0.0) st.cfg.noise_sigma = manifest.noise_sigma;
    if (manifest.grid_override > 0) {
        st.cfg.nx = manifest.grid_override;
        st.cfg.pulse.disk_thickness = st.cfg.grid_step();
    }
    if (manifest.workers > 0) st.cfg.workers = manifest.workers;
    st.cfg.seed = manifest.seed;
    st.cfg.validate();
    if (!is_builtin(manifest.model) && !fs::exists(manifest.model))
        throw ConfigError("unknown model '" + manifest.model + "'");

    std::vector<std::string> stages = manifest.stages.empty() ? kStages : manifest.stages;
    // stages must form a contiguous, ordered run of the pipeline
    std::vector<size_t> idx;
    for (const auto& s : stages) {
        auto it = std::find(kStages.begin(), kStages.end(), s);
        if (it == kStages.end()) throw ConfigError("unknown stage '" + s + "'");
        idx.push_back(static_cast<size_t>(it - kStages.begin()));
    }
    for (size_t i = 1; i < idx.size(); ++i)
        if (idx[i] != idx[i - 1] + 1)
            throw ConfigError("stages must form a contiguous run of "
                              "simulate,preprocess,invert,assemble");

    st.signature = config_signature(st.cfg, manifest.model, manifest.seed);
    st.out = fs::path(manifest.out_dir);
    fs::create_directories(st.out);
    write_config(st.cfg, (st.out / "effective_config.cfg").string());

    RunReport rep;
    for (size_t q : idx) {
        const std::string& stage = kStages[q];
        try {
            if (stage == "simulate") stage_simulate(st);
            else if (stage == "preprocess") stage_preprocess(st);
            else if (stage == "invert") stage_invert(st);
            else if (stage == "assemble") rep = stage_assemble(st);
        } catch (const std::exception& e) {
            throw std::runtime_error("stage '" + stage + "' failed: " + std::string(e.what()));
        }
    }
    if (manifest.emit_plots) emit_plot_files(st);

    std::ofstream tlog(st.out / "timing.txt");
    for (const auto& [name, sec] : st.timer.entries) tlog << name << " " << sec << " s\n";
    return rep;
}

int run(const RunManifest& manifest) {
    try {
        RunReport rep = run_pipeline(manifest);
        if (!rep.planes.empty()) {
            std::cout << "model " << rep.model << ": fused eps = " << rep.fused_eps
                      << ", x extent = " << rep.x_extent << "\n";
            for (const auto& p : rep.planes)
                std::cout << "  plane " << p.line + 1 << ": eps_max = " << p.eps_max
                          << ", sources inside = " << p.sources_inside << "\n";
            std::cout << "travel time: observed " << rep.travel_time_observed << ", geometric "
                      << rep.travel_time_geometric << "\n";
        }
        return kExitOk;
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        auto contains = [&](const char* pat) { return msg.find(pat) != std::string::npos; };
        // nested stage errors keep their category by message inspection
        if (dynamic_cast<const ConfigError*>(&e) || contains("config") || contains("unknown"))
            return kExitConfig;
        if (dynamic_cast<const SimulationError*>(&e) || contains("instability") ||
            contains("non-finite field"))
            return kExitInstability;
        if (dynamic_cast<const EmptyDetectionError*>(&e) || contains("no values meet") ||
            contains("identically zero"))
            return kExitEmptyDetection;
        if (dynamic_cast<const SolverError*>(&e) || contains("diverged") ||
            contains("left the working ball"))
            return kExitDivergence;
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace sarcvx
