#pragma once

// Discrete energy accounting for completed trajectories: the quadratic
// balance identity (kinetic + dissipation + absorption + pressure energy
// against initial energy + source work) and the first-order dissipation
// identity (time-derivative cost against the initial functional).  Residuals
// quantify the discretization error of the scheme; they shrink under
// simultaneous space-time refinement.

#include "netform/dynamics.hpp"

namespace netform {

struct P0Solution {
    ScalarField p0;
    EllipticSolveReport report;

    P0Solution(ScalarField p, EllipticSolveReport rep)
        : p0(std::move(p)), report(std::move(rep)) {}
};

/// Pressure of the initial conductance field.
P0Solution solve_p0(const VectorField& m0, const ScalarField& S, double tol = 1e-10);

/// All terms of both identities evaluated at the snapshot nearest tau.
struct LedgerEntry {
    double tau = 0;  // requested time
    double t = 0;    // snapshot time actually used
    int step = 0;

    // Quadratic balance: lhs terms...
    double half_m_sq = 0;          // (1/2) ||m(t)||_2^2
    double diffusion_cost = 0;     // D^2 int_0^t ||grad m||_2^2
    double activation_cost = 0;    // E^2 int_0^t ||m . grad p||_2^2
    double absorption_cost = 0;    // int_0^t int |m|^{2 gamma}
    double pressure_energy = 0;    // 2 E^2 int_0^t ||grad p||_2^2
    // ...and rhs terms.
    double half_m0_sq = 0;         // (1/2) ||m0||_2^2
    double source_work = 0;        // 2 E^2 int_0^t int S p
    double balance_lhs = 0;
    double balance_rhs = 0;
    double balance_residual = 0;   // lhs - rhs
    double balance_scale = 0;      // max(|lhs|, |rhs|)

    // First-order dissipation: lhs terms...
    double dtm_cost = 0;           // int_0^t ||dm/dt||_2^2
    double grad_m_energy = 0;      // (D^2/2) ||grad m(t)||_2^2
    double activation_energy = 0;  // (E^2/2) ||m . grad p (t)||_2^2
    double pressure_gradient_energy = 0; // (E^2/2) ||grad p(t)||_2^2
    double absorption_energy = 0;  // (1/(2 gamma)) int |m(t)|^{2 gamma}
    double dissipation_lhs = 0;
    double dissipation_rhs = 0;    // same functional at t = 0
    double dissipation_residual = 0;
    double dissipation_scale = 0;
};

/// Evaluate both identities at (the snapshot nearest) tau.
LedgerEntry audit_energy(const Trajectory& traj, double tau);

/// Convenience accessors for one identity at a time.
double balance_residual(const Trajectory& traj, double tau);
double dissipation_residual(const Trajectory& traj, double tau);

} // namespace netform
