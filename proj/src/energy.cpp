#include "netform/energy.hpp"

#include <algorithm>
#include <cmath>

namespace netform {

P0Solution solve_p0(const VectorField& m0, const ScalarField& S, double tol) {
    auto [p, report] = solve_pressure(m0, S, tol);
    return P0Solution(std::move(p), std::move(report));
}

namespace {

double pow_integral(const VectorField& m, double gamma) {
    const Eigen::ArrayXd msq = m.values.square().rowwise().sum();
    const double sum = gamma == 1.0 ? msq.sum() : msq.pow(gamma).sum();
    return sum * m.grid.cell_volume();
}

double alignment_sq_integral(const VectorField& m, const VectorField& gp) {
    const Eigen::ArrayXd mdotgp = (m.values * gp.values).rowwise().sum();
    return mdotgp.square().sum() * m.grid.cell_volume();
}

} // namespace

LedgerEntry audit_energy(const Trajectory& traj, double tau) {
    const SimConfig& cfg = traj.config;
    const Snapshot& snap = traj.nearest_snapshot(tau);
    const Snapshot& start = traj.snapshots.front();
    const PhysParams& phys = cfg.phys;
    const double d2 = phys.D * phys.D;
    const double e2 = phys.E * phys.E;

    LedgerEntry led;
    led.tau = tau;
    led.t = snap.t;
    led.step = snap.step;

    const double m_sq = norm_l2(snap.m);
    led.half_m_sq = 0.5 * m_sq * m_sq;
    led.diffusion_cost = d2 * snap.record.int_grad_m_sq;
    led.activation_cost = e2 * snap.record.int_m_dot_gp_sq;
    led.absorption_cost = snap.record.int_m_pow_2gamma;
    led.pressure_energy = 2.0 * e2 * snap.record.int_grad_p_sq;
    const double m0_sq = norm_l2(start.m);
    led.half_m0_sq = 0.5 * m0_sq * m0_sq;
    led.source_work = 2.0 * e2 * snap.record.int_S_p;

    led.balance_lhs = led.half_m_sq + led.diffusion_cost + led.activation_cost +
                      led.absorption_cost + led.pressure_energy;
    led.balance_rhs = led.half_m0_sq + led.source_work;
    led.balance_residual = led.balance_lhs - led.balance_rhs;
    led.balance_scale = std::max(std::abs(led.balance_lhs), std::abs(led.balance_rhs));

    const TensorField grad_m_now = gradient(snap.m);
    const VectorField gp_now = gradient(snap.p);
    const double gm2 = grad_m_now.values.square().sum() * snap.m.grid.cell_volume();
    const double gp2 = inner(gp_now, gp_now);

    led.dtm_cost = snap.record.int_dtm_sq;
    led.grad_m_energy = 0.5 * d2 * gm2;
    led.activation_energy = 0.5 * e2 * alignment_sq_integral(snap.m, gp_now);
    led.pressure_gradient_energy = 0.5 * e2 * gp2;
    led.absorption_energy = pow_integral(snap.m, phys.gamma) / (2.0 * phys.gamma);
    led.dissipation_lhs = led.dtm_cost + led.grad_m_energy + led.activation_energy +
                          led.pressure_gradient_energy + led.absorption_energy;

    const TensorField grad_m0 = gradient(start.m);
    const VectorField gp0 = gradient(start.p);
    led.dissipation_rhs =
        0.5 * d2 * grad_m0.values.square().sum() * start.m.grid.cell_volume() +
                          0.5 * e2 * alignment_sq_integral(start.m, gp0) +
                          0.5 * e2 * inner(gp0, gp0) +
                          pow_integral(start.m, phys.gamma) / (2.0 * phys.gamma);
    led.dissipation_residual = led.dissipation_lhs - led.dissipation_rhs;
    led.dissipation_scale =
        std::max(std::abs(led.dissipation_lhs), std::abs(led.dissipation_rhs));
    return led;
}

double balance_residual(const Trajectory& traj, double tau) {
    return audit_energy(traj, tau).balance_residual;
}

double dissipation_residual(const Trajectory& traj, double tau) {
    return audit_energy(traj, tau).dissipation_residual;
}

} // namespace netform
