#pragma once

// Time integration of the transport system: at each step the pressure is
// recomputed from the current conductance field (warm-started elliptic
// solve), the activation and absorption terms are treated explicitly, and
// diffusion implicitly (backward Euler Helmholtz solve per component).
// Dirichlet data: m = 0 and p = 0 on the boundary.

#include "netform/elliptic.hpp"
#include "netform/grid.hpp"
#include "netform/phys.hpp"

#include <string>
#include <vector>

namespace netform {

struct SimConfig {
    SimConfig(Grid grid_, PhysParams phys_, VectorField m0_, ScalarField S_, double dt_,
              double t_end_)
        : grid(grid_), phys(phys_), m0(std::move(m0_)), S(std::move(S_)), dt(dt_),
          t_end(t_end_) {}

    Grid grid;
    PhysParams phys;
    VectorField m0;
    ScalarField S;
    double dt;
    double t_end;
    double q = 3.0;                 // exponent of the space-time gradient accumulator
    double elliptic_tol = 1e-10;
    double blowup_cap = 1e6;        // sup-norm cap on m and grad m
    double reg_eps = 1e-12;         // absorption regularizer, used only when gamma < 1
    int output_stride = 100;        // snapshot cadence in steps
    double stability_factor = 1e3;  // dt <= factor * h^2 when reaction dominates

    void validate() const; // throws std::invalid_argument naming the failing field
};

enum class Outcome { completed, blowup_detected, solver_failure };

std::string to_string(Outcome o);
int exit_code(Outcome o);

/// Scalar diagnostics and cumulative time integrals at one recorded time.
/// Integrals are left-endpoint rectangle sums over [0, t]; the time-derivative
/// integral uses forward differences of consecutive states at full dt
/// resolution.
struct StepRecord {
    double t = 0;
    double m_inf = 0;        // sup |m|
    double grad_m_inf = 0;   // sup Frobenius norm of grad m
    double grad_p_inf = 0;   // sup |grad p|
    double p_min = 0;
    double int_grad_m_sq = 0;     // integral of |grad m|^2 over space-time
    double int_m_dot_gp_sq = 0;   // integral of (m . grad p)^2
    double int_m_pow_2gamma = 0;  // integral of |m|^{2 gamma}
    double int_grad_p_sq = 0;     // integral of |grad p|^2
    double int_S_p = 0;           // integral of S p
    double int_dtm_sq = 0;        // integral of |dm/dt|^2
    double int_grad_p_4q = 0;     // integral of |grad p|^{4q}
};

struct Snapshot {
    int step = 0;
    double t = 0;
    VectorField m;
    ScalarField p;
    StepRecord record;
    double m_jump = 0; // discrete modulus of continuity max |m(x+h)| - |m(x)| jump

    Snapshot(int step_, double t_, VectorField m_, ScalarField p_, StepRecord rec,
             double jump)
        : step(step_), t(t_), m(std::move(m_)), p(std::move(p_)), record(rec),
          m_jump(jump) {}
};

struct Trajectory {
    explicit Trajectory(SimConfig cfg) : config(std::move(cfg)) {}

    SimConfig config;
    std::vector<StepRecord> series; // one row per step time, starting at t = 0
    std::vector<Snapshot> snapshots;
    Outcome outcome = Outcome::completed;
    double event_time = 0;      // cap-crossing or failure time; t_end when completed
    int steps_taken = 0;
    long elliptic_iterations = 0;

    const Snapshot& nearest_snapshot(double tau) const;
};

/// One step: solve pressure for the current m, form the explicit reaction
/// E^2 (m . grad p) grad p - |m|^{2(gamma-1)} m, then the implicit diffusion
/// solve.  Exposed for tests; simulate() is the driver.
struct StepResult {
    VectorField m_next;
    ScalarField p;      // pressure of the *incoming* state
    int elliptic_iterations = 0;
};
StepResult step(const VectorField& m, const SimConfig& cfg,
                const ScalarField* p_warm = nullptr);

/// Run the time loop from m0 to t_end (or to a cap crossing / solver
/// failure).  Snapshots at step 0, every output_stride steps, and the final
/// step.
Trajectory simulate(const SimConfig& cfg);

/// Space-time L^{4q} norm of grad p over the whole run.  Exact (streamed at
/// full dt resolution) when q matches config.q; otherwise falls back to
/// snapshot-resolution quadrature.
double measure_grad_p_4q(const Trajectory& traj, double q);

} // namespace netform
