#include "netform/manifest.hpp"

#include "netform/field_io.hpp"
#include "netform/synth.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace netform {

namespace {

namespace fs = std::filesystem;

const Json& require_member(const Json& j, const std::string& name, const std::string& ctx) {
    if (!j.is_object() || !j.contains(name))
        throw ConfigError("config field '" + ctx + name + "': missing");
    return j.at(name);
}

double as_number(const Json& j, const std::string& full_name) {
    if (!j.is_number()) throw ConfigError("config field '" + full_name + "': expected a number");
    return j.get<double>();
}

double require_number(const Json& j, const std::string& name, const std::string& ctx) {
    return as_number(require_member(j, name, ctx), ctx + name);
}

double optional_number(const Json& j, const std::string& name, double fallback,
                       const std::string& ctx) {
    if (!j.is_object() || !j.contains(name)) return fallback;
    return as_number(j.at(name), ctx + name);
}

long long require_integer(const Json& j, const std::string& name, const std::string& ctx) {
    const Json& v = require_member(j, name, ctx);
    if (!v.is_number_integer())
        throw ConfigError("config field '" + ctx + name + "': expected an integer");
    return v.get<long long>();
}

std::string require_string(const Json& j, const std::string& name, const std::string& ctx) {
    const Json& v = require_member(j, name, ctx);
    if (!v.is_string())
        throw ConfigError("config field '" + ctx + name + "': expected a string");
    return v.get<std::string>();
}

std::vector<double> number_list(const Json& v, const std::string& full_name) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
        return out;
    }
    if (!v.is_array())
        throw ConfigError("config field '" + full_name + "': expected a number or array");
    for (const auto& e : v) out.push_back(as_number(e, full_name));
    return out;
}

} // namespace

Grid parse_grid(const Json& j) {
    if (!j.is_object()) throw ConfigError("config field 'grid': expected an object");
    const long long dim = require_integer(j, "dim", "grid.");
    if (dim != 1 && dim != 2) throw ConfigError("config field 'grid.dim': must be 1 or 2");
    auto n = number_list(require_member(j, "n", "grid."), "grid.n");
    if (n.size() == 1 && dim == 2) n.push_back(n[0]);
    if (static_cast<long long>(n.size()) != dim)
        throw ConfigError("config field 'grid.n': needs one entry per axis");
    std::vector<double> extent{1.0, 1.0};
    if (j.contains("extent")) {
        extent = number_list(j.at("extent"), "grid.extent");
        if (extent.size() == 1 && dim == 2) extent.push_back(extent[0]);
        if (static_cast<long long>(extent.size()) != dim)
            throw ConfigError("config field 'grid.extent': needs one entry per axis");
    }
    for (double e : n)
        if (e < 3 || e != std::floor(e))
            throw ConfigError("config field 'grid.n': entries must be integers >= 3");
    try {
        return Grid(static_cast<int>(dim),
                    {static_cast<int>(n[0]), n.size() > 1 ? static_cast<int>(n[1]) : 0},
                    {extent[0], extent.size() > 1 ? extent[1] : 0.0});
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field 'grid': ") + e.what());
    }
}

PhysParams parse_phys(const Json& j) {
    PhysParams p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw ConfigError("config field 'phys': expected an object");
    p.D = optional_number(j, "D", 1.0, "phys.");
    p.E = optional_number(j, "E", 1.0, "phys.");
    p.gamma = optional_number(j, "gamma", 1.0, "phys.");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field '") + e.what() + "'");
    }
    return p;
}

namespace {

ScalarField sinpi_scalar(const Grid& g, double amp) {
    constexpr double pi = std::numbers::pi;
    ScalarField out =
        g.dim() == 1
            ? sample_scalar(g,
                            [&](double x) { return amp * std::sin(pi * x / g.extent(0)); })
            : sample_scalar(g, [&](double x, double y) {
                  return amp * std::sin(pi * x / g.extent(0)) *
                         std::sin(pi * y / g.extent(1));
              });
    force_dirichlet(out); // snap the ~1e-16 sine tails to exact zeros
    return out;
}

} // namespace

ScalarField parse_scalar_field(const Json& j, const Grid& g, const std::string& name) {
    const std::string type = require_string(j, "type", name + ".");
    if (type == "zero") return ScalarField(g);
    if (type == "constant")
        return ScalarField(
            g, Eigen::ArrayXd::Constant(g.total_nodes(), require_number(j, "value", name + ".")));
    if (type == "sin_pi") return sinpi_scalar(g, optional_number(j, "amplitude", 1.0, name + "."));
    if (type == "modes") {
        Rng rng(static_cast<std::uint64_t>(require_integer(j, "seed", name + ".")));
        const int modes = static_cast<int>(require_integer(j, "modes", name + "."));
        const double amp = require_number(j, "amp", name + ".");
        const bool dirichlet = j.value("dirichlet", false);
        return random_smooth_scalar(g, rng, modes, amp, dirichlet);
    }
    if (type == "csv") return read_scalar_csv(require_string(j, "path", name + "."), g);
    throw ConfigError("config field '" + name + ".type': unknown field type '" + type + "'");
}

VectorField parse_vector_field(const Json& j, const Grid& g, const std::string& name) {
    const std::string type = require_string(j, "type", name + ".");
    if (type == "zero") return VectorField(g);
    if (type == "sin_pi") {
        auto amps = number_list(require_member(j, "amplitude", name + "."), name + ".amplitude");
        if (static_cast<int>(amps.size()) != g.dim())
            throw ConfigError("config field '" + name + ".amplitude': needs one entry per component");
        VectorField out(g);
        for (int c = 0; c < g.dim(); ++c) out.values.col(c) = sinpi_scalar(g, amps[c]).values;
        return out;
    }
    if (type == "modes") {
        Rng rng(static_cast<std::uint64_t>(require_integer(j, "seed", name + ".")));
        const int modes = static_cast<int>(require_integer(j, "modes", name + "."));
        const double amp = require_number(j, "amp", name + ".");
        return random_smooth_vector(g, rng, modes, amp);
    }
    if (type == "csv") return read_vector_csv(require_string(j, "path", name + "."), g);
    throw ConfigError("config field '" + name + ".type': unknown field type '" + type + "'");
}

SimConfig parse_sim_config(const Json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    const Grid grid = parse_grid(require_member(j, "grid", ""));
    const PhysParams phys = parse_phys(j.contains("phys") ? j.at("phys") : Json());
    VectorField m0 = parse_vector_field(require_member(j, "m0", ""), grid, "m0");
    ScalarField S = parse_scalar_field(require_member(j, "S", ""), grid, "S");
    SimConfig cfg(grid, phys, std::move(m0), std::move(S),
                  require_number(j, "dt", ""), require_number(j, "t_end", ""));
    cfg.q = optional_number(j, "q", cfg.q, "");
    cfg.elliptic_tol = optional_number(j, "elliptic_tol", cfg.elliptic_tol, "");
    cfg.blowup_cap = optional_number(j, "blowup_cap", cfg.blowup_cap, "");
    cfg.reg_eps = optional_number(j, "reg_eps", cfg.reg_eps, "");
    cfg.output_stride = static_cast<int>(
        optional_number(j, "output_stride", cfg.output_stride, ""));
    cfg.stability_factor = optional_number(j, "stability_factor", cfg.stability_factor, "");
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field '") + e.what() + "'");
    }
    return cfg;
}

EstimateInputs parse_estimate_inputs(const Json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    EstimateInputs in;
    const int N = static_cast<int>(require_integer(j, "N", ""));
    const double q = require_number(j, "q", "");
    const double ell = require_number(j, "ell", "");
    const double gamma = optional_number(j, "gamma", 1.0, "");
    try {
        in.exps = exponents(N, q, ell, gamma);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field '") + e.what() + "'");
    }
    in.phys.D = optional_number(j, "D", 1.0, "");
    in.phys.E = optional_number(j, "E", 1.0, "");
    in.phys.gamma = gamma;
    in.c = optional_number(j, "c", 1.0, "");
    if (!(in.c > 0.0)) throw ConfigError("config field 'c': must be positive");
    in.norm_S = optional_number(j, "norm_S", 0.0, "");
    in.norm_S_2 = optional_number(j, "norm_S_2", 0.0, "");
    in.norm_m0_2 = optional_number(j, "norm_m0_2", 0.0, "");
    in.norm_m0_inf = optional_number(j, "norm_m0_inf", 0.0, "");
    in.norm_grad_m0_inf = optional_number(j, "norm_grad_m0_inf", 0.0, "");
    for (double v : {in.norm_S, in.norm_S_2, in.norm_m0_2, in.norm_m0_inf,
                     in.norm_grad_m0_inf})
        if (!(v >= 0.0)) throw ConfigError("config field 'norm_*': must be nonnegative");
    return in;
}

Json grid_to_json(const Grid& g) {
    Json j;
    j["dim"] = g.dim();
    Json n = Json::array(), ext = Json::array();
    for (int a = 0; a < g.dim(); ++a) {
        n.push_back(g.interior(a));
        ext.push_back(g.extent(a));
    }
    j["n"] = n;
    j["extent"] = ext;
    return j;
}

Json estimate_inputs_to_json(const EstimateInputs& in) {
    Json j;
    j["N"] = in.exps.N;
    j["q"] = in.exps.q;
    j["ell"] = in.exps.l;
    j["gamma"] = in.exps.gamma;
    j["D"] = in.phys.D;
    j["E"] = in.phys.E;
    j["c"] = in.c;
    j["norm_S"] = in.norm_S;
    j["norm_S_2"] = in.norm_S_2;
    j["norm_m0_2"] = in.norm_m0_2;
    j["norm_m0_inf"] = in.norm_m0_inf;
    j["norm_grad_m0_inf"] = in.norm_grad_m0_inf;
    return j;
}

Json exponents_to_json(const ExponentSet& e) {
    Json j;
    j["N"] = e.N;
    j["q"] = e.q;
    j["l"] = e.l;
    j["gamma"] = e.gamma;
    j["s0"] = e.s0;
    j["alpha"] = e.alpha;
    j["s1"] = e.s1;
    j["s4"] = e.s4;
    j["s5"] = e.s5;
    return j;
}

namespace {

std::string snapshot_name(const char* prefix, int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%08d.csv", prefix, step);
    return buf;
}

const char* const kSeriesHeader =
    "step,t,m_inf,grad_m_inf,grad_p_inf,p_min,int_grad_m_sq,int_m_dot_gp_sq,"
    "int_m_pow_2gamma,int_grad_p_sq,int_S_p,int_dtm_sq,int_grad_p_4q,m_jump";

std::string series_row(const Snapshot& s) {
    const StepRecord& r = s.record;
    std::ostringstream os;
    os << s.step;
    for (double v : {r.t, r.m_inf, r.grad_m_inf, r.grad_p_inf, r.p_min, r.int_grad_m_sq,
                     r.int_m_dot_gp_sq, r.int_m_pow_2gamma, r.int_grad_p_sq, r.int_S_p,
                     r.int_dtm_sq, r.int_grad_p_4q, s.m_jump})
        os << ',' << detail::format_double(v);
    return os.str();
}

Outcome outcome_from_string(const std::string& s) {
    if (s == "completed") return Outcome::completed;
    if (s == "blowup_detected") return Outcome::blowup_detected;
    if (s == "solver_failure") return Outcome::solver_failure;
    throw ConfigError("manifest field 'outcome': unknown value '" + s + "'");
}

} // namespace

void write_trajectory_artifacts(const std::string& dir, const Trajectory& traj,
                                const Json& config_echo, std::uint64_t seed,
                                double wall_time_s) {
    fs::create_directories(dir);
    const auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };

    write_csv(path("S.csv"), traj.config.S);

    Json snaps = Json::array();
    for (const Snapshot& s : traj.snapshots) {
        const std::string m_name = snapshot_name("m", s.step);
        const std::string p_name = snapshot_name("p", s.step);
        write_csv(path(m_name), s.m);
        write_csv(path(p_name), s.p);
        Json e;
        e["step"] = s.step;
        e["t"] = s.t;
        e["m"] = m_name;
        e["p"] = p_name;
        e["m_jump"] = s.m_jump;
        snaps.push_back(e);
    }

    std::ostringstream series;
    series << kSeriesHeader << '\n';
    for (const Snapshot& s : traj.snapshots) series << series_row(s) << '\n';
    write_text_file(path("series.csv"), series.str());

    double sup_m = 0, sup_gm = 0, sup_gp = 0;
    for (const StepRecord& r : traj.series) {
        sup_m = std::max(sup_m, r.m_inf);
        sup_gm = std::max(sup_gm, r.grad_m_inf);
        sup_gp = std::max(sup_gp, r.grad_p_inf);
    }

    Json m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["seed"] = seed;
    m["config"] = config_echo;
    m["outcome"] = to_string(traj.outcome);
    m["event_time"] = traj.event_time;
    m["steps_taken"] = traj.steps_taken;
    m["elliptic_iterations"] = traj.elliptic_iterations;
    m["sup_m_inf"] = sup_m;
    m["sup_grad_m_inf"] = sup_gm;
    m["sup_grad_p_inf"] = sup_gp;
    if (!traj.series.empty()) {
        const StepRecord& r = traj.series.back();
        Json ints;
        ints["int_grad_m_sq"] = r.int_grad_m_sq;
        ints["int_m_dot_gp_sq"] = r.int_m_dot_gp_sq;
        ints["int_m_pow_2gamma"] = r.int_m_pow_2gamma;
        ints["int_grad_p_sq"] = r.int_grad_p_sq;
        ints["int_S_p"] = r.int_S_p;
        ints["int_dtm_sq"] = r.int_dtm_sq;
        ints["int_grad_p_4q"] = r.int_grad_p_4q;
        m["integrals"] = ints;
    }
    m["source"] = "S.csv";
    m["series"] = "series.csv";
    m["snapshots"] = snaps;
    m["wall_time_s"] = wall_time_s;
    write_text_file(path("manifest.json"), m.dump(2) + "\n");
}

Trajectory load_trajectory(const std::string& dir) {
    const auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
    Json m;
    try {
        m = Json::parse(read_text_file(path("manifest.json")));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("manifest.json: ") + e.what());
    }

    // Re-point the field specs at the artifacts in this directory; the
    // original specs may reference generators or files that are not portable.
    Json cfg_json = require_member(m, "config", "manifest.");
    const Json& snaps_json = require_member(m, "snapshots", "manifest.");
    if (!snaps_json.is_array() || snaps_json.empty())
        throw ConfigError("manifest field 'snapshots': must be a nonempty array");
    cfg_json["S"] = Json{{"type", "csv"}, {"path", path("S.csv")}};
    cfg_json["m0"] = Json{
        {"type", "csv"},
        {"path", path(require_string(snaps_json.front(), "m", "snapshot."))}};

    SimConfig cfg = parse_sim_config(cfg_json);
    Trajectory traj(cfg);
    traj.outcome = outcome_from_string(require_string(m, "outcome", "manifest."));
    traj.event_time = require_number(m, "event_time", "manifest.");
    traj.steps_taken = static_cast<int>(require_integer(m, "steps_taken", "manifest."));

    // Series table at snapshot cadence, keyed by step.
    std::map<int, std::pair<StepRecord, double>> rows;
    {
        std::istringstream in(read_text_file(path("series.csv")));
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<double> v;
            while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
            if (v.size() != 14) throw ConfigError("series.csv: wrong column count");
            StepRecord r;
            int i = 1;
            r.t = v[i++]; r.m_inf = v[i++]; r.grad_m_inf = v[i++]; r.grad_p_inf = v[i++];
            r.p_min = v[i++]; r.int_grad_m_sq = v[i++]; r.int_m_dot_gp_sq = v[i++];
            r.int_m_pow_2gamma = v[i++]; r.int_grad_p_sq = v[i++]; r.int_S_p = v[i++];
            r.int_dtm_sq = v[i++]; r.int_grad_p_4q = v[i++];
            rows[static_cast<int>(v[0])] = {r, v[13]};
        }
    }

    for (const Json& e : snaps_json) {
        const int step = static_cast<int>(require_integer(e, "step", "snapshot."));
        const auto it = rows.find(step);
        if (it == rows.end())
            throw ConfigError("series.csv: missing row for snapshot step " +
                              std::to_string(step));
        VectorField mm = read_vector_csv(path(require_string(e, "m", "snapshot.")), cfg.grid);
        ScalarField pp = read_scalar_csv(path(require_string(e, "p", "snapshot.")), cfg.grid);
        traj.snapshots.emplace_back(step, it->second.first.t, std::move(mm), std::move(pp),
                                    it->second.first, it->second.second);
        traj.series.push_back(it->second.first);
    }
    if (traj.snapshots.empty()) throw ConfigError("manifest.json: no snapshots listed");
    traj.config.m0 = traj.snapshots.front().m;
    return traj;
}

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("NETFORM_OUT"); env != nullptr && *env != '\0')
        return env;
    return "out";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace netform
