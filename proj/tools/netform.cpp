// Command-line laboratory for the network-formation transport model:
// trajectory simulation, guaranteed-horizon evaluation, elliptic and energy
// audits, scalar lemma suites, and parameter sweeps.

#include "netform/bounds.hpp"
#include "netform/dynamics.hpp"
#include "netform/energy.hpp"
#include "netform/field_io.hpp"
#include "netform/manifest.hpp"
#include "netform/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using netform::Json;

namespace {

struct CommonFlags {
    std::string out;
    std::uint64_t seed = 42;
    int workers = 0; // 0: hardware concurrency
    double tol = 0.0; // 0: command default
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--out", fl.out, "Output directory (default: $NETFORM_OUT or ./out)");
    cmd->add_option("--seed", fl.seed, "RNG seed for synthetic data");
    cmd->add_option("--workers", fl.workers, "Worker threads for sweeps (0 = auto)");
    cmd->add_option("--tol", fl.tol, "Solver/bisection tolerance override");
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json load_json(const std::string& path) {
    try {
        return Json::parse(netform::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw netform::ConfigError(std::string(path) + ": " + e.what());
    }
}

std::string fmt(double v) { return netform::detail::format_double(v); }

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_path, const CommonFlags& fl) {
    const auto t0 = std::chrono::steady_clock::now();
    const Json cfg_json = load_json(config_path);
    netform::SimConfig cfg = netform::parse_sim_config(cfg_json);
    if (fl.tol > 0.0) cfg.elliptic_tol = fl.tol;

    netform::Trajectory traj = netform::simulate(cfg);

    const std::string dir = netform::resolve_out_dir(fl.out);
    netform::write_trajectory_artifacts(dir, traj, cfg_json, fl.seed, elapsed_s(t0));

    std::cout << "outcome=" << netform::to_string(traj.outcome)
              << " event_time=" << fmt(traj.event_time) << " steps=" << traj.steps_taken
              << " final|m|=" << fmt(norm_linf(traj.snapshots.back().m))
              << " artifacts=" << dir << "\n";
    return netform::exit_code(traj.outcome);
}

// ---------------------------------------------------------------------------

Json tmax_to_json(const netform::EstimateInputs& in, const netform::TmaxResult& res) {
    Json j;
    j["tool"] = netform::kToolName;
    j["version"] = netform::kToolVersion;
    j["inputs"] = netform::estimate_inputs_to_json(in);
    j["exponents"] = netform::exponents_to_json(in.exps);
    j["finite"] = res.finite;
    j["T_max"] = res.T;
    j["log_T_max"] = res.log_T;
    j["log10_T_max"] = res.log_T / std::log(10.0);
    j["phi_residual"] = res.phi_residual;
    j["iterations"] = res.iterations;
    return j;
}

int cmd_tmax(const std::string& inputs_path, const CommonFlags& fl) {
    const Json in_json = load_json(inputs_path);
    const netform::EstimateInputs in = netform::parse_estimate_inputs(in_json);
    const double tol = fl.tol > 0.0 ? fl.tol : 1e-12;
    const netform::TmaxResult res = netform::tmax_solve(in, tol);

    const std::string dir = netform::resolve_out_dir(fl.out);
    fs::create_directories(dir);
    netform::write_text_file((fs::path(dir) / "tmax.json").string(),
                             tmax_to_json(in, res).dump(2) + "\n");
    if (res.finite)
        std::cout << "T_max=" << fmt(res.T) << " log10_T_max=" << fmt(res.log_T / std::log(10.0))
                  << " phi_residual=" << fmt(res.phi_residual) << "\n";
    else
        std::cout << "T_max=inf (estimate never binds)\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_audit_elliptic(const std::string& config_path, const CommonFlags& fl) {
    const Json j = load_json(config_path);
    const netform::Grid grid = netform::parse_grid(j.contains("grid") ? j.at("grid") : Json());
    const double q = j.value("q", 2.0);
    const double ell = j.value("ell", 4.0);
    const int ensemble = j.value("ensemble", 50);
    const int modes = j.value("modes", 3);
    const double amp = j.value("amp", 2.0);
    const double tol = fl.tol > 0.0 ? fl.tol : 1e-10;

    netform::ScalarField S =
        j.contains("S") ? netform::parse_scalar_field(j.at("S"), grid, "S")
                        : netform::ScalarField(
                              grid, Eigen::ArrayXd::Constant(grid.total_nodes(), 1.0));

    netform::Rng rng(fl.seed);
    std::ostringstream csv;
    csv << "index,q,l,s1,lhs,w_norm,rhs_core,implied_c\n";
    double sup_c = 0.0;
    for (int i = 0; i <= ensemble; ++i) {
        // Row 0 is the isotropic baseline w = 0.
        netform::VectorField w =
            i == 0 ? netform::VectorField(grid)
                   : netform::random_smooth_vector(grid, rng, modes, amp);
        const netform::W1qAuditRecord rec = netform::audit_w1q(w, S, q, ell, tol);
        sup_c = std::max(sup_c, rec.implied_c);
        csv << i << ',' << fmt(rec.q) << ',' << fmt(rec.l) << ',' << fmt(rec.s1) << ','
            << fmt(rec.lhs) << ',' << fmt(rec.w_norm) << ',' << fmt(rec.rhs_core) << ','
            << fmt(rec.implied_c) << '\n';
    }

    const std::string dir = netform::resolve_out_dir(fl.out);
    fs::create_directories(dir);
    netform::write_text_file((fs::path(dir) / "elliptic_audit.csv").string(), csv.str());
    std::cout << "rows=" << ensemble + 1 << " sup_implied_c=" << fmt(sup_c) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_audit_energy(const std::string& run_dir, const CommonFlags& fl,
                     const std::vector<double>& times) {
    const netform::Trajectory traj = netform::load_trajectory(run_dir);

    std::vector<double> taus = times;
    if (taus.empty())
        for (const auto& s : traj.snapshots) taus.push_back(s.t);

    std::ostringstream csv;
    csv << "tau,t,step,half_m_sq,diffusion_cost,activation_cost,absorption_cost,"
           "pressure_energy,half_m0_sq,source_work,balance_lhs,balance_rhs,"
           "balance_residual,balance_scale,dtm_cost,grad_m_energy,activation_energy,"
           "pressure_gradient_energy,absorption_energy,dissipation_lhs,dissipation_rhs,"
           "dissipation_residual,dissipation_scale\n";
    double worst_rel = 0.0;
    for (double tau : taus) {
        const netform::LedgerEntry e = netform::audit_energy(traj, tau);
        const double cols[] = {
            e.tau, e.t, static_cast<double>(e.step), e.half_m_sq, e.diffusion_cost,
            e.activation_cost, e.absorption_cost, e.pressure_energy, e.half_m0_sq,
            e.source_work, e.balance_lhs, e.balance_rhs, e.balance_residual,
            e.balance_scale, e.dtm_cost, e.grad_m_energy, e.activation_energy,
            e.pressure_gradient_energy, e.absorption_energy, e.dissipation_lhs,
            e.dissipation_rhs, e.dissipation_residual, e.dissipation_scale};
        for (size_t i = 0; i < std::size(cols); ++i) {
            if (i > 0) csv << ',';
            csv << fmt(cols[i]);
        }
        csv << '\n';
        if (e.balance_scale > 0)
            worst_rel = std::max(worst_rel, std::abs(e.balance_residual) / e.balance_scale);
        if (e.dissipation_scale > 0)
            worst_rel =
                std::max(worst_rel, std::abs(e.dissipation_residual) / e.dissipation_scale);
    }

    const std::string dir = fl.out.empty() ? run_dir : netform::resolve_out_dir(fl.out);
    fs::create_directories(dir);
    netform::write_text_file((fs::path(dir) / "energy_ledger.csv").string(), csv.str());
    std::cout << "audited=" << taus.size() << " worst_relative_residual=" << fmt(worst_rel)
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct LemmaSuiteResult {
    Json report;
    bool pass = true;
};

LemmaSuiteResult run_lemma_suites(std::uint64_t seed, int trials) {
    LemmaSuiteResult out;
    netform::Rng rng(seed);

    { // Monotonicity margin of the power map, randomized over dim and gamma.
        const std::vector<double> gammas{0.6, 0.75, 1.0, 1.5, 2.0, 3.0};
        long failures = 0;
        double worst = std::numeric_limits<double>::infinity();
        for (double gamma : gammas)
            for (int t = 0; t < trials; ++t) {
                const int dim = 1 + static_cast<int>(rng.below(4));
                Eigen::VectorXd x(dim), y(dim);
                for (int d = 0; d < dim; ++d) {
                    x[d] = rng.uniform(-3.0, 3.0);
                    y[d] = rng.uniform(-3.0, 3.0);
                }
                if (rng.uniform() < 0.02) y = x; // exercise the zero-difference edge
                const double margin = netform::power_map_margin(x, y, gamma);
                const double scale = std::pow(1.0 + x.norm() + y.norm(), 2.0 * gamma);
                worst = std::min(worst, margin / scale);
                if (margin < -1e-12 * scale) ++failures;
            }
        Json r;
        r["trials"] = trials * static_cast<long>(gammas.size());
        r["failures"] = failures;
        r["worst_normalized_margin"] = worst;
        out.report["power_map_monotonicity"] = r;
        out.pass = out.pass && failures == 0;
    }

    { // Geometric recursion: canonical threshold case + randomized cases.
        const double thr = netform::geometric_recursion_threshold(1.0, 2.0, 1.0);
        const auto seq = netform::geometric_recursion_iterate(1.0, 2.0, 1.0, thr, 60);
        int first_below = -1;
        for (size_t n = 0; n < seq.size(); ++n)
            if (seq[n] < 1e-10) { first_below = static_cast<int>(n); break; }
        const auto diverging = netform::geometric_recursion_iterate(1.0, 2.0, 1.0, 1.5 * thr, 200);
        const bool diverged = std::any_of(diverging.begin(), diverging.end(),
                                          [](double v) { return v > 1e6; });
        long law_violations = 0;
        for (int t = 0; t < 200; ++t) {
            const double c = rng.uniform(0.5, 4.0);
            const double b = rng.uniform(1.5, 4.0);
            const double alpha = rng.uniform(0.5, 2.0);
            const double thr = netform::geometric_recursion_threshold(c, b, alpha);
            // Strictly sub-threshold starts: the bound then holds with
            // compounding slack, so roundoff cannot produce false positives.
            // (Exactly at the threshold the recursion is neutrally stable and
            // float error grows by a factor 1+alpha per step.)
            const double y0 = thr * rng.uniform(0.05, 0.999);
            const auto s = netform::geometric_recursion_iterate(c, b, alpha, y0, 80);
            for (size_t n = 0; n < s.size(); ++n) {
                const double law = y0 * std::pow(b, -static_cast<double>(n) / alpha);
                if (s[n] > law * (1.0 + 1e-9)) ++law_violations;
            }
        }
        Json r;
        r["canonical_threshold"] = thr;
        r["first_iteration_below_1e10"] = first_below;
        r["above_threshold_diverged"] = diverged;
        r["decay_law_violations"] = law_violations;
        out.report["geometric_recursion"] = r;
        out.pass = out.pass && first_below >= 0 && first_below <= 60 && diverged &&
                   law_violations == 0;
    }

    { // Continuation barrier: synthetic admissible curves stay below h0.
        long violations = 0;
        const int cases = 100;
        for (int t = 0; t < cases; ++t) {
            const double delta = rng.uniform(0.3, 3.0);
            const double b = rng.uniform(0.2, 5.0);
            const double eps = netform::continuation_eps_threshold(delta, b) *
                               rng.uniform(0.05, 1.0);
            if (!netform::continuation_admissible(eps, delta, b)) { ++violations; continue; }
            const double h0 = netform::continuation_h0(eps, delta);
            // Smallest root of eps h^{1+delta} - h + b on (0, h0]: g decreases
            // there from b > 0 to its minimum.
            const auto g = [&](double h) { return eps * std::pow(h, 1.0 + delta) - h + b; };
            double lo = 0.0, hi = h0;
            if (g(hi) > 0.0) { ++violations; continue; } // admissible => min <= 0
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) > 0.0 ? lo : hi) = mid;
            }
            const double h_low = hi;
            // Any continuous curve below h_low satisfies the hypothesis
            // h <= eps h^{1+delta} + b pointwise; it must stay below h0.
            for (int s = 0; s <= 200; ++s) {
                const double tt = s / 200.0;
                const double hval =
                    h_low * (0.15 + 0.85 * 0.5 *
                                         (1.0 + std::sin(2.0 * std::numbers::pi *
                                                             (tt + rng.uniform() * 0.01) *
                                                             3.0)));
                if (hval > eps * std::pow(hval, 1.0 + delta) + b + 1e-12) ++violations;
                if (hval > h0 * (1.0 + 1e-12)) ++violations;
            }
            if (!(h_low <= h0 * (1.0 + 1e-12))) ++violations;
        }
        Json r;
        r["cases"] = cases;
        r["violations"] = violations;
        out.report["continuation_barrier"] = r;
        out.pass = out.pass && violations == 0;
    }

    out.report["pass"] = out.pass;
    return out;
}

int cmd_lemmas(const CommonFlags& fl, int trials) {
    LemmaSuiteResult res = run_lemma_suites(fl.seed, trials);
    const std::string dir = netform::resolve_out_dir(fl.out);
    fs::create_directories(dir);
    netform::write_text_file((fs::path(dir) / "lemmas.json").string(),
                             res.report.dump(2) + "\n");
    std::cout << (res.pass ? "all lemma suites passed" : "LEMMA SUITE FAILURE") << "\n";
    return res.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------

void set_by_path(Json& j, const std::string& dotted, const Json& value) {
    Json* cur = &j;
    std::stringstream ss(dotted);
    std::string part, next;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (size_t i = 0; i + 1 < parts.size(); ++i) cur = &((*cur)[parts[i]]);
    (*cur)[parts.back()] = value;
}

int cmd_sweep(const std::string& spec_path, const CommonFlags& fl) {
    const Json plan = load_json(spec_path);
    const std::string mode = plan.value("mode", "");
    if (mode != "tmax" && mode != "simulate")
        throw netform::ConfigError("config field 'mode': must be \"tmax\" or \"simulate\"");
    if (!plan.contains("base"))
        throw netform::ConfigError("config field 'base': missing");
    if (!plan.contains("axes") || !plan.at("axes").is_object() || plan.at("axes").empty())
        throw netform::ConfigError("config field 'axes': must be a nonempty object");

    std::vector<std::string> axis_names;
    std::vector<std::vector<Json>> axis_values;
    for (const auto& [name, vals] : plan.at("axes").items()) {
        if (!vals.is_array() || vals.empty())
            throw netform::ConfigError("config field 'axes." + name + "': must be a nonempty array");
        axis_names.push_back(name);
        axis_values.emplace_back(vals.begin(), vals.end());
    }

    std::vector<std::vector<size_t>> combos;
    std::vector<size_t> idx(axis_names.size(), 0);
    bool more = true;
    while (more) {
        combos.push_back(idx);
        more = false;
        for (size_t a = idx.size(); a-- > 0;) {
            if (++idx[a] < axis_values[a].size()) {
                more = true;
                break;
            }
            idx[a] = 0;
        }
    }

    const std::string dir = netform::resolve_out_dir(fl.out);
    fs::create_directories(dir);

    std::ostringstream csv;
    csv << "run";
    for (const auto& n : axis_names) csv << ',' << n;

    if (mode == "tmax") {
        csv << ",finite,T_max,log_T_max,log10_T_max,phi_residual\n";
        const double tol = fl.tol > 0.0 ? fl.tol : 1e-12;
        for (size_t r = 0; r < combos.size(); ++r) {
            Json base = plan.at("base");
            for (size_t a = 0; a < axis_names.size(); ++a)
                set_by_path(base, axis_names[a], axis_values[a][combos[r][a]]);
            const netform::EstimateInputs in = netform::parse_estimate_inputs(base);
            const netform::TmaxResult res = netform::tmax_solve(in, tol);
            csv << r;
            for (size_t a = 0; a < axis_names.size(); ++a)
                csv << ',' << axis_values[a][combos[r][a]].dump();
            csv << ',' << (res.finite ? 1 : 0) << ',' << fmt(res.T) << ','
                << fmt(res.log_T) << ',' << fmt(res.log_T / std::log(10.0)) << ','
                << fmt(res.phi_residual) << '\n';
        }
        netform::write_text_file((fs::path(dir) / "sweep.csv").string(), csv.str());
        std::cout << "rows=" << combos.size() << " artifacts=" << dir << "\n";
        return 0;
    }

    // simulate mode: run every combination, each into its own subdirectory.
    csv << ",outcome,event_time,steps\n";
    struct Row { std::string outcome; double event_time; int steps; };
    std::vector<Row> rows(combos.size());
    std::atomic<size_t> cursor{0};
    int workers = fl.workers > 0 ? fl.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min<int>(workers, static_cast<int>(combos.size()));

    const auto worker = [&]() {
        for (;;) {
            const size_t r = cursor.fetch_add(1);
            if (r >= combos.size()) return;
            Json base = plan.at("base");
            for (size_t a = 0; a < axis_names.size(); ++a)
                set_by_path(base, axis_names[a], axis_values[a][combos[r][a]]);
            const auto t0 = std::chrono::steady_clock::now();
            netform::SimConfig cfg = netform::parse_sim_config(base);
            if (fl.tol > 0.0) cfg.elliptic_tol = fl.tol;
            netform::Trajectory traj = netform::simulate(cfg);
            char sub[32];
            std::snprintf(sub, sizeof(sub), "run_%04zu", r);
            netform::write_trajectory_artifacts((fs::path(dir) / sub).string(), traj,
                                                base, fl.seed, elapsed_s(t0));
            rows[r] = {netform::to_string(traj.outcome), traj.event_time,
                       traj.steps_taken};
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (size_t r = 0; r < combos.size(); ++r) {
        csv << r;
        for (size_t a = 0; a < axis_names.size(); ++a)
            csv << ',' << axis_values[a][combos[r][a]].dump();
        csv << ',' << rows[r].outcome << ',' << fmt(rows[r].event_time) << ','
            << rows[r].steps << '\n';
    }
    netform::write_text_file((fs::path(dir) / "summary.csv").string(), csv.str());
    std::cout << "rows=" << combos.size() << " artifacts=" << dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for an elliptic-parabolic network-formation model"};
    app.require_subcommand(1);

    CommonFlags fl;
    std::string config_path, run_dir;
    std::vector<double> times;
    int trials = 100000;

    CLI::App* simulate = app.add_subcommand("simulate", "Integrate a trajectory");
    simulate->add_option("config", config_path, "JSON configuration")->required();
    add_common(simulate, fl);

    CLI::App* tmax = app.add_subcommand("tmax", "Guaranteed-existence horizon");
    tmax->add_option("inputs", config_path, "JSON estimate inputs")->required();
    add_common(tmax, fl);

    CLI::App* ael = app.add_subcommand("audit-elliptic", "Gradient-integrability ensemble audit");
    ael->add_option("config", config_path, "JSON audit configuration")->required();
    add_common(ael, fl);

    CLI::App* aen = app.add_subcommand("audit-energy", "Energy identities of a finished run");
    aen->add_option("run_dir", run_dir, "Trajectory artifact directory")->required();
    aen->add_option("--times", times, "Audit times (default: all snapshots)")
        ->delimiter(',');
    add_common(aen, fl);

    CLI::App* lem = app.add_subcommand("lemmas", "Scalar lemma property suites");
    lem->add_option("--trials", trials, "Trials per exponent in the power-map suite");
    add_common(lem, fl);

    CLI::App* swp = app.add_subcommand("sweep", "Cartesian parameter sweep");
    swp->add_option("plan", config_path, "JSON sweep plan")->required();
    add_common(swp, fl);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, fl);
        if (tmax->parsed()) return cmd_tmax(config_path, fl);
        if (ael->parsed()) return cmd_audit_elliptic(config_path, fl);
        if (aen->parsed()) return cmd_audit_energy(run_dir, fl, times);
        if (lem->parsed()) return cmd_lemmas(fl, trials);
        if (swp->parsed()) return cmd_sweep(config_path, fl);
    } catch (const netform::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const netform::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what()
                  << " (residual " << e.last_residual << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
