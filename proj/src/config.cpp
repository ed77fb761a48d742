#include "sarcvx/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sarcvx {

void PipelineConfig::validate() const {
    if (!(lambda >= 1.0)) throw ConfigError("config: lambda must be >= 1");
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("config: alpha must lie in (0, 1/2)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("config: gamma must lie in (0, 1)");
    if (!(dy > 0.0 && dtau > 0.0)) throw ConfigError("config: grid steps must be positive");
    if (!(c_upper >= 4.0)) throw ConfigError("config: c_upper must be >= 4");
    if (!(b >= std::sqrt(c_upper) - 1e-12)) throw ConfigError("config: b must be >= sqrt(c_upper)");
    if (!(t_tilde >= 4.0 * b - 1e-12)) throw ConfigError("config: t_tilde must be >= 4*b");
    if (!(descent_step > 0.0 && descent_step < 1.0))
        throw ConfigError("config: descent_step must lie in (0, 1)");
    if (max_iters < 1) throw ConfigError("config: max_iters must be positive");
    if (!(noise_sigma >= 0.0 && noise_sigma < 1.0))
        throw ConfigError("config: noise_sigma must lie in [0, 1)");
    if (nx < 5) throw ConfigError("config: nx must be at least 5");
    if (nt < 3) throw ConfigError("config: nt must be at least 3");
    if (!(sim_time > 0.0)) throw ConfigError("config: sim_time must be positive");
    if (!(domain_radius > 0.0)) throw ConfigError("config: domain_radius must be positive");
    if (neumann_order != 1 && neumann_order != 2)
        throw ConfigError("config: neumann_order must be 1 or 2");
    if (workers < 1) throw ConfigError("config: workers must be positive");
    pulse.validate();
    geometry.validate();
}

PipelineConfig default_config() {
    PipelineConfig cfg;
    cfg.geometry.elevation_angle = M_PI / 4.0;
    cfg.geometry.line_spacing = 0.05;
    for (double y0 : {-1.75, -1.70, -1.65}) {
        SourceLine line;
        line.y0 = y0;
        line.z0 = 0.8;
        line.count = 28;
        line.half_extent = 0.7;
        cfg.geometry.lines.push_back(line);
    }
    cfg.pulse.disk_thickness = cfg.grid_step();
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_num(key, trim(item)));
    return out;
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);

    PipelineConfig cfg = default_config();
    std::vector<double> line_y0;
    double line_z0 = cfg.geometry.lines.front().z0;
    int line_sources = cfg.geometry.lines.front().count;
    double line_half_extent = cfg.geometry.lines.front().half_extent;
    bool disk_thickness_set = false;

    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string s = raw;
        size_t hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));

        if (key == "lambda") cfg.lambda = parse_num(key, val);
        else if (key == "alpha") cfg.alpha = parse_num(key, val);
        else if (key == "gamma") cfg.gamma = parse_num(key, val);
        else if (key == "dy") cfg.dy = parse_num(key, val);
        else if (key == "dtau") cfg.dtau = parse_num(key, val);
        else if (key == "c_upper") {
            cfg.c_upper = parse_num(key, val);
            cfg.b = std::sqrt(cfg.c_upper);
            cfg.t_tilde = 4.0 * cfg.b;
        } else if (key == "b") cfg.b = parse_num(key, val);
        else if (key == "t_tilde") cfg.t_tilde = parse_num(key, val);
        else if (key == "reg_norm") {
            if (val == "h2") cfg.reg_norm = RegNorm::H2;
            else if (val == "h4") cfg.reg_norm = RegNorm::H4;
            else throw ConfigError("config: reg_norm must be h2 or h4");
        } else if (key == "descent_step") cfg.descent_step = parse_num(key, val);
        else if (key == "max_iters") cfg.max_iters = static_cast<int>(parse_num(key, val));
        else if (key == "grad_tol") cfg.grad_tol = parse_num(key, val);
        else if (key == "ball_radius_max") cfg.ball_radius_max = parse_num(key, val);
        else if (key == "metric") {
            if (val == "smoothed") cfg.metric = GradientMetric::Smoothed;
            else if (val == "coordinate") cfg.metric = GradientMetric::Coordinate;
            else throw ConfigError("config: metric must be smoothed or coordinate");
        } else if (key == "neumann_order") cfg.neumann_order = static_cast<int>(parse_num(key, val));
        else if (key == "cal_factor") cfg.cal_factor = parse_num(key, val);
        else if (key == "smooth_boundary_data") cfg.smooth_boundary_data = parse_num(key, val) != 0.0;
        else if (key == "noise_sigma") cfg.noise_sigma = parse_num(key, val);
        else if (key == "seed") cfg.seed = static_cast<unsigned long long>(parse_num(key, val));
        else if (key == "domain_radius") cfg.domain_radius = parse_num(key, val);
        else if (key == "nx") cfg.nx = static_cast<int>(parse_num(key, val));
        else if (key == "sim_time") cfg.sim_time = parse_num(key, val);
        else if (key == "nt") cfg.nt = static_cast<int>(parse_num(key, val));
        else if (key == "scheme") {
            if (val == "implicit") cfg.scheme = TimeScheme::Implicit;
            else if (val == "explicit") cfg.scheme = TimeScheme::Explicit;
            else throw ConfigError("config: scheme must be implicit or explicit");
        } else if (key == "sand_eps") cfg.sand_eps = parse_num(key, val);
        else if (key == "pulse_omega0") cfg.pulse.omega0 = parse_num(key, val);
        else if (key == "pulse_alpha0") cfg.pulse.alpha0 = parse_num(key, val);
        else if (key == "pulse_tau0") cfg.pulse.tau0 = parse_num(key, val);
        else if (key == "disk_radius") cfg.pulse.disk_radius = parse_num(key, val);
        else if (key == "disk_thickness") {
            cfg.pulse.disk_thickness = parse_num(key, val);
            disk_thickness_set = true;
        } else if (key == "elevation_angle") cfg.geometry.elevation_angle = parse_num(key, val);
        else if (key == "line_spacing") cfg.geometry.line_spacing = parse_num(key, val);
        else if (key == "line_y0") line_y0 = parse_list(key, val);
        else if (key == "line_z0") line_z0 = parse_num(key, val);
        else if (key == "sources_per_line") line_sources = static_cast<int>(parse_num(key, val));
        else if (key == "source_half_extent") line_half_extent = parse_num(key, val);
        else if (key == "workers") cfg.workers = static_cast<int>(parse_num(key, val));
        else throw ConfigError("config: unknown key '" + key + "'");
    }

    if (line_y0.empty())
        for (const auto& l : cfg.geometry.lines) line_y0.push_back(l.y0);
    cfg.geometry.lines.clear();
    for (double y0 : line_y0) {
        SourceLine line;
        line.y0 = y0;
        line.z0 = line_z0;
        line.count = line_sources;
        line.half_extent = line_half_extent;
        cfg.geometry.lines.push_back(line);
    }
    if (!disk_thickness_set) cfg.pulse.disk_thickness = cfg.grid_step();

    cfg.validate();
    return cfg;
}

void write_config(const PipelineConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("config: cannot write " + path);
    out.precision(17);
    out << "# inversion rectangle and functional\n";
    out << "lambda = " << cfg.lambda << "\n";
    out << "alpha = " << cfg.alpha << "\n";
    out << "gamma = " << cfg.gamma << "\n";
    out << "dy = " << cfg.dy << "\n";
    out << "dtau = " << cfg.dtau << "\n";
    out << "c_upper = " << cfg.c_upper << "\n";
    out << "b = " << cfg.b << "\n";
    out << "t_tilde = " << cfg.t_tilde << "\n";
    out << "reg_norm = " << (cfg.reg_norm == RegNorm::H2 ? "h2" : "h4") << "\n";
    out << "\n# gradient descent\n";
    out << "descent_step = " << cfg.descent_step << "\n";
    out << "max_iters = " << cfg.max_iters << "\n";
    out << "grad_tol = " << cfg.grad_tol << "\n";
    out << "ball_radius_max = " << cfg.ball_radius_max << "\n";
    out << "metric = " << (cfg.metric == GradientMetric::Smoothed ? "smoothed" : "coordinate") << "\n";
    out << "neumann_order = " << cfg.neumann_order << "\n";
    out << "\n# preprocessing\n";
    out << "cal_factor = " << cfg.cal_factor << "\n";
    out << "smooth_boundary_data = " << (cfg.smooth_boundary_data ? 1 : 0) << "\n";
    out << "noise_sigma = " << cfg.noise_sigma << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "\n# forward simulation\n";
    out << "domain_radius = " << cfg.domain_radius << "\n";
    out << "nx = " << cfg.nx << "\n";
    out << "sim_time = " << cfg.sim_time << "\n";
    out << "nt = " << cfg.nt << "\n";
    out << "scheme = " << (cfg.scheme == TimeScheme::Implicit ? "implicit" : "explicit") << "\n";
    out << "sand_eps = " << cfg.sand_eps << "\n";
    out << "pulse_omega0 = " << cfg.pulse.omega0 << "\n";
    out << "pulse_alpha0 = " << cfg.pulse.alpha0 << "\n";
    out << "pulse_tau0 = " << cfg.pulse.tau0 << "\n";
    out << "disk_radius = " << cfg.pulse.disk_radius << "\n";
    out << "disk_thickness = " << cfg.pulse.disk_thickness << "\n";
    out << "\n# acquisition\n";
    out << "elevation_angle = " << cfg.geometry.elevation_angle << "\n";
    out << "line_spacing = " << cfg.geometry.line_spacing << "\n";
    out << "line_y0 = ";
    for (size_t i = 0; i < cfg.geometry.lines.size(); ++i)
        out << (i ? ", " : "") << cfg.geometry.lines[i].y0;
    out << "\n";
    out << "line_z0 = " << cfg.geometry.lines.front().z0 << "\n";
    out << "sources_per_line = " << cfg.geometry.lines.front().count << "\n";
    out << "source_half_extent = " << cfg.geometry.lines.front().half_extent << "\n";
    out << "workers = " << cfg.workers << "\n";
}

}  // namespace sarcvx
