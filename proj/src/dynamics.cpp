#include "netform/dynamics.hpp"

#include "netform/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace netform {

void SimConfig::validate() const {
    phys.validate();
    if (!m0.grid.same_as(grid))
        throw std::invalid_argument("m0: lives on a different grid than config.grid");
    if (!S.grid.same_as(grid))
        throw std::invalid_argument("S: lives on a different grid than config.grid");
    if (!vanishes_on_boundary(m0))
        throw std::invalid_argument("m0: must vanish on the boundary");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("dt: must be positive and finite");
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw std::invalid_argument("t_end: must be nonnegative and finite");
    if (!(q >= 1.0)) throw std::invalid_argument("q: must be at least 1");
    if (!(elliptic_tol > 0.0)) throw std::invalid_argument("elliptic_tol: must be positive");
    if (!(blowup_cap > 0.0)) throw std::invalid_argument("blowup_cap: must be positive");
    if (!(reg_eps >= 0.0)) throw std::invalid_argument("reg_eps: must be nonnegative");
    if (phys.gamma < 1.0 && !(reg_eps > 0.0))
        throw std::invalid_argument("reg_eps: must be positive when gamma < 1");
    if (output_stride < 1) throw std::invalid_argument("output_stride: must be at least 1");
    if (!(stability_factor > 0.0))
        throw std::invalid_argument("stability_factor: must be positive");
}

std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::blowup_detected: return "blowup_detected";
    case Outcome::solver_failure: return "solver_failure";
    }
    return "unknown";
}

int exit_code(Outcome o) {
    switch (o) {
    case Outcome::completed: return 0;
    case Outcome::blowup_detected: return 2;
    case Outcome::solver_failure: return 3;
    }
    return 3;
}

const Snapshot& Trajectory::nearest_snapshot(double tau) const {
    if (snapshots.empty()) throw std::runtime_error("trajectory has no snapshots");
    const Snapshot* best = &snapshots.front();
    for (const auto& s : snapshots)
        if (std::abs(s.t - tau) < std::abs(best->t - tau)) best = &s;
    return *best;
}

namespace {

/// Absorption coefficient |m|^{2(gamma-1)} per node; the regularizer enters
/// only on the gamma < 1 branch.
Eigen::ArrayXd absorption_coefficient(const VectorField& m, const PhysParams& phys,
                                      double reg_eps) {
    const Eigen::ArrayXd msq = m.values.square().rowwise().sum();
    if (phys.gamma == 1.0) return Eigen::ArrayXd::Ones(msq.size());
    if (phys.gamma > 1.0) return msq.pow(phys.gamma - 1.0);
    return (msq + reg_eps).pow(phys.gamma - 1.0);
}

/// Per-step machinery with factorizations and warm-start state reused across
/// the whole run.
class Integrator {
public:
    explicit Integrator(const SimConfig& cfg) : cfg_(cfg), p_(cfg.grid) {
        const Grid& g = cfg.grid;
        if (g.dim() == 1) {
            const int n = g.interior(0);
            const double k = cfg.dt * cfg.phys.D * cfg.phys.D / (g.h(0) * g.h(0));
            helm_tri_ = std::make_unique<Tridiagonal>(
                Eigen::ArrayXd::Constant(n, -k), Eigen::ArrayXd::Constant(n, 1.0 + 2.0 * k),
                Eigen::ArrayXd::Constant(n, -k));
        }
    }

    const ScalarField& pressure() const { return p_; }

    void seed_pressure(const ScalarField& p) { p_ = p; }

    /// Solve pressure for m into the cached field (warm start from the
    /// previous solve); returns iteration count.
    int refresh_pressure(const VectorField& m) {
        auto [p, report] = solve_pressure(m, cfg_.S, cfg_.elliptic_tol, &p_);
        p_ = std::move(p);
        grad_p_ = std::move(report.grad_p);
        return report.iterations;
    }

    const VectorField& grad_p() const { return grad_p_; }

    /// Advance m by one step using the cached pressure of the incoming state.
    VectorField advance(const VectorField& m) {
        const Grid& g = cfg_.grid;
        const double e2 = cfg_.phys.E * cfg_.phys.E;
        const Eigen::ArrayXd activation =
            e2 * (m.values * grad_p_.values).rowwise().sum();
        const Eigen::ArrayXd absorb = absorption_coefficient(m, cfg_.phys, cfg_.reg_eps);

        VectorField next(g);
        for (int c = 0; c < g.dim(); ++c) {
            Eigen::ArrayXd rhs =
                m.values.col(c) +
                cfg_.dt * (activation * grad_p_.values.col(c) - absorb * m.values.col(c));
            for_each_boundary_node(g, [&](Eigen::Index k) { rhs[k] = 0.0; });
            next.values.col(c) = diffuse(rhs);
        }
        return next;
    }

private:
    /// Backward-Euler diffusion solve (I - dt D^2 lap) x = rhs with
    /// homogeneous Dirichlet data.
    Eigen::ArrayXd diffuse(const Eigen::ArrayXd& rhs) {
        const Grid& g = cfg_.grid;
        if (g.dim() == 1) {
            const int n = g.interior(0);
            Eigen::ArrayXd x = Eigen::ArrayXd::Zero(rhs.size());
            Eigen::ArrayXd xi(n);
            helm_tri_->solve(rhs.segment(1, n), xi);
            x.segment(1, n) = xi;
            return x;
        }
        const int nx = g.nodes(0), ny = g.nodes(1);
        const double kx = cfg_.dt * cfg_.phys.D * cfg_.phys.D / (g.h(0) * g.h(0));
        const double ky = cfg_.dt * cfg_.phys.D * cfg_.phys.D / (g.h(1) * g.h(1));
        const double diag = 1.0 + 2.0 * kx + 2.0 * ky;
        const auto apply = [&](const Eigen::ArrayXd& x, Eigen::ArrayXd& y) {
            y = x; // identity on Dirichlet rows
            for (int j = 1; j + 1 < ny; ++j) {
                const Eigen::Index r = g.index(0, j);
                for (int i = 1; i + 1 < nx; ++i)
                    y[r + i] = diag * x[r + i] - kx * (x[r + i - 1] + x[r + i + 1]) -
                               ky * (x[r + i - nx] + x[r + i + nx]);
            }
        };
        const auto precond = [&](const Eigen::ArrayXd& r, Eigen::ArrayXd& z) {
            z = r / diag;
        };
        Eigen::ArrayXd x = Eigen::ArrayXd::Zero(rhs.size());
        const int max_iter = 50 * std::max(g.interior(0), g.interior(1));
        const PcgReport rep = pcg(apply, precond, rhs, x, cfg_.elliptic_tol, max_iter);
        if (!rep.converged)
            throw SolverFailure("diffusion solve exceeded its iteration budget",
                                rep.residual_norm * std::sqrt(g.cell_volume()),
                                rep.iterations);
        return x;
    }

    const SimConfig& cfg_;
    ScalarField p_;
    VectorField grad_p_{p_.grid};
    std::unique_ptr<Tridiagonal> helm_tri_;
};

/// Reject explicit-reaction configurations that the guard dt <= factor h^2
/// cannot stabilize.
void check_stability(const SimConfig& cfg, double grad_p0_inf) {
    const double e2 = cfg.phys.E * cfg.phys.E;
    const double m0_inf = norm_linf(cfg.m0);
    double absorb_max;
    if (cfg.phys.gamma >= 1.0)
        absorb_max = std::pow(m0_inf * m0_inf, cfg.phys.gamma - 1.0);
    else
        absorb_max = std::pow(cfg.reg_eps, cfg.phys.gamma - 1.0);
    const double reaction_rate = e2 * grad_p0_inf * grad_p0_inf + absorb_max;
    const double h = cfg.grid.min_h();
    const double diffusion_rate = cfg.phys.D * cfg.phys.D / (h * h);
    if (reaction_rate > diffusion_rate && cfg.dt > cfg.stability_factor * h * h)
        throw std::invalid_argument(
            "dt: reaction-dominated run needs dt <= stability_factor * h^2");
}

} // namespace

StepResult step(const VectorField& m, const SimConfig& cfg, const ScalarField* p_warm) {
    cfg.validate();
    Integrator integ(cfg);
    if (p_warm != nullptr) integ.seed_pressure(*p_warm);
    const int iters = integ.refresh_pressure(m);
    StepResult out{integ.advance(m), integ.pressure(), iters};
    return out;
}

Trajectory simulate(const SimConfig& cfg) {
    cfg.validate();
    Trajectory traj(cfg);
    const Grid& g = cfg.grid;
    const double v = g.cell_volume();
    const double dt = cfg.dt;
    const long total_steps = std::lround(cfg.t_end / dt);

    VectorField m = cfg.m0;
    Integrator integ(cfg);

    StepRecord rec; // cumulative integrals live here between steps

    const auto fill_state_scalars = [&](const VectorField& mm, bool pressure_ok) {
        rec.m_inf = norm_linf(mm);
        rec.grad_m_inf = norm_linf(gradient(mm));
        if (pressure_ok) {
            rec.grad_p_inf = norm_linf(integ.grad_p());
            rec.p_min = integ.pressure().values.minCoeff();
        }
    };

    const auto emit_snapshot = [&](int k) {
        if (!traj.snapshots.empty() && traj.snapshots.back().step == k) return;
        traj.snapshots.emplace_back(k, rec.t, m, integ.pressure(), rec,
                                    max_adjacent_jump(m));
    };

    try {
        traj.elliptic_iterations += integ.refresh_pressure(m);

    } catch (const SolverFailure&) {
        traj.outcome = Outcome::solver_failure;
        traj.event_time = 0.0;
        fill_state_scalars(m, false);
        traj.series.push_back(rec);
        emit_snapshot(0);
        return traj;
    }

    check_stability(cfg, norm_linf(integ.grad_p()));

    rec.t = 0.0;
    fill_state_scalars(m, true);
    traj.series.push_back(rec);
    emit_snapshot(0);

    if (rec.m_inf > cfg.blowup_cap || rec.grad_m_inf > cfg.blowup_cap) {
        traj.outcome = Outcome::blowup_detected;
        traj.event_time = 0.0;
        return traj;
    }

    const double four_q = 4.0 * cfg.q;

    for (long k = 0; k < total_steps; ++k) {
        // Accumulate left-endpoint integrals with the state at t_k.
        const Eigen::ArrayXd mdotgp = (m.values * integ.grad_p().values).rowwise().sum();
        const Eigen::ArrayXd gp_sq = integ.grad_p().values.square().rowwise().sum();
        const Eigen::ArrayXd m_sq = m.values.square().rowwise().sum();
        rec.int_grad_m_sq += dt * v * gradient(m).values.square().sum();
        rec.int_m_dot_gp_sq += dt * v * mdotgp.square().sum();
        rec.int_m_pow_2gamma +=
            dt * v *
            (cfg.phys.gamma == 1.0 ? m_sq.sum() : m_sq.pow(cfg.phys.gamma).sum());
        rec.int_grad_p_sq += dt * v * gp_sq.sum();
        rec.int_S_p += dt * v * (cfg.S.values * integ.pressure().values).sum();
        rec.int_grad_p_4q += dt * v * gp_sq.pow(0.5 * four_q).sum();

        VectorField m_next = integ.advance(m);
        rec.int_dtm_sq += (m_next.values - m.values).square().sum() * v / dt;
        m = std::move(m_next);
        rec.t = (k + 1) * dt;
        traj.steps_taken = static_cast<int>(k + 1);

        const double m_inf = norm_linf(m);
        const double grad_m_inf = norm_linf(gradient(m));
        const bool crisis = m_inf > cfg.blowup_cap || grad_m_inf > cfg.blowup_cap;

        bool pressure_ok = true;
        try {
            traj.elliptic_iterations += integ.refresh_pressure(m);
        } catch (const SolverFailure&) {
            pressure_ok = false;
        }
        fill_state_scalars(m, pressure_ok);
        traj.series.push_back(rec);

        if (crisis || !pressure_ok) {
            traj.outcome = crisis ? Outcome::blowup_detected : Outcome::solver_failure;
            traj.event_time = rec.t;
            emit_snapshot(static_cast<int>(k + 1));
            return traj;
        }
        if ((k + 1) % cfg.output_stride == 0 || k + 1 == total_steps)
            emit_snapshot(static_cast<int>(k + 1));
    }

    traj.outcome = Outcome::completed;
    traj.event_time = cfg.t_end;
    return traj;
}

double measure_grad_p_4q(const Trajectory& traj, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("q: must be at least 1");
    const double four_q = 4.0 * q;
    if (q == traj.config.q) {
        const double acc = traj.series.empty() ? 0.0 : traj.series.back().int_grad_p_4q;
        return acc > 0.0 ? std::pow(acc, 1.0 / four_q) : 0.0;
    }
    // Snapshot-resolution fallback for a mismatched exponent.
    double acc = 0.0;
    const auto& snaps = traj.snapshots;
    for (size_t s = 0; s + 1 < snaps.size(); ++s) {
        const double span = snaps[s + 1].t - snaps[s].t;
        const VectorField gp = gradient(snaps[s].p);
        acc += span * gp.grid.cell_volume() *
               gp.values.square().rowwise().sum().pow(0.5 * four_q).sum();
    }
    return acc > 0.0 ? std::pow(acc, 1.0 / four_q) : 0.0;
}

} // namespace netform
