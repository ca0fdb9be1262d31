#pragma once

// Anisotropic pressure problem: -div[(I + m (x) m) grad p] = S with p = 0 on
// the boundary.  Flux form: identity part on faces (5-point), rank-one
// m (x) m part at cell corners with arithmetically averaged m — symmetric and
// positive definite for every conductance field m, second-order consistent,
// and in 1D exactly the tridiagonal flux scheme with face coefficient
// 1 + ((m_i + m_{i+1})/2)^2.

#include "netform/grid.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace netform {

/// Thrown when an iterative linear solve exhausts its iteration budget.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), last_residual(residual), iterations(iterations) {}

    double last_residual;
    int iterations;
};

struct EllipticSolveReport {
    int iterations = 0;
    double final_residual = 0.0; // discrete L2 norm of S - A p on the interior
    VectorField grad_p;          // nodal gradient of the solution

    explicit EllipticSolveReport(const Grid& g) : grad_p(g) {}
};

/// Apply the discrete operator to p (Dirichlet rows of the output are zero).
ScalarField apply_operator(const VectorField& m, const ScalarField& p);

/// Solve the pressure problem by preconditioned conjugate gradients
/// (exact tridiagonal preconditioner in 1D, Jacobi in 2D).  Convergence:
/// interior residual <= tol * ||S||_2; throws SolverFailure otherwise.
/// `warm_start` seeds the iteration (its boundary values are ignored).
std::pair<ScalarField, EllipticSolveReport>
solve_pressure(const VectorField& m, const ScalarField& S, double tol,
               const ScalarField* warm_start = nullptr);

/// Closed-form 1D pressure gradient: p_x = (C - int_0^x S) / (1 + m^2) with C
/// fixed by int_0^1 p_x = 0 (trapezoid quadrature).  Independent of the
/// discrete operator; used as an oracle against solve_pressure.
ScalarField pressure_1d_oracle(const ScalarField& m, const ScalarField& S);

/// One row of the gradient-integrability audit: the constant the estimate
/// ||grad p||_q <= c (1 + ||w||_{W^{1,l}})^{s1} (||grad p||_1 + ||S||_{Nq/(N+q)})
/// would need for this (w, S) pair.
struct W1qAuditRecord {
    double q = 0, l = 0, s1 = 0;
    double lhs = 0;      // ||grad p||_q
    double w_norm = 0;   // ||w||_{W^{1,l}}
    double rhs_core = 0; // ||grad p||_1 + ||S||_{Nq/(N+q)}
    double implied_c = 0;
};

W1qAuditRecord audit_w1q(const VectorField& w, const ScalarField& S, double q, double l,
                         double tol = 1e-10);

} // namespace netform
