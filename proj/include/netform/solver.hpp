#pragma once

// Matrix-free linear solver kernels: preconditioned conjugate gradients and a
// tridiagonal (Thomas) factorization used both as a direct solver and as an
// exact preconditioner for one-dimensional operators.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace netform {

struct PcgReport {
    int iterations = 0;
    double residual_norm = 0.0; // Euclidean norm of b - A x at exit
    bool converged = false;
};

/// Conjugate gradients on A x = b with preconditioner application
/// `precond(r, z)` (z := M^{-1} r) and operator application `apply(x, y)`
/// (y := A x).  Vectors with zero rows outside the active set must be kept
/// zero by both callables.  Convergence: ||r||_2 <= rel_tol * ||b||_2.
template <class ApplyFn, class PrecondFn>
PcgReport pcg(ApplyFn&& apply, PrecondFn&& precond, const Eigen::ArrayXd& b,
              Eigen::ArrayXd& x, double rel_tol, int max_iter) {
    PcgReport rep;
    const double b_norm = std::sqrt(b.square().sum());
    if (b_norm == 0.0) {
        x.setZero();
        rep.converged = true;
        return rep;
    }
    const double target = rel_tol * b_norm;

    Eigen::ArrayXd ax(b.size()), r(b.size()), z(b.size()), p(b.size()), ap(b.size());
    apply(x, ax);
    r = b - ax;
    double r_norm = std::sqrt(r.square().sum());
    if (r_norm <= target) {
        rep.converged = true;
        rep.residual_norm = r_norm;
        return rep;
    }
    precond(r, z);
    p = z;
    double rz = (r * z).sum();
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, ap);
        const double pap = (p * ap).sum();
        if (!(pap > 0.0) || !std::isfinite(pap)) {
            rep.iterations = it;
            rep.residual_norm = r_norm;
            return rep; // operator lost definiteness numerically
        }
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        r_norm = std::sqrt(r.square().sum());
        rep.iterations = it;
        if (r_norm <= target) {
            rep.converged = true;
            rep.residual_norm = r_norm;
            return rep;
        }
        precond(r, z);
        const double rz_new = (r * z).sum();
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    rep.residual_norm = r_norm;
    return rep;
}

/// Tridiagonal system (Thomas algorithm), LU-factored once, solved many
/// times.  Row i: sub[i]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = b[i].
class Tridiagonal {
public:
    Tridiagonal(Eigen::ArrayXd sub, Eigen::ArrayXd diag, Eigen::ArrayXd sup)
        : sub_(std::move(sub)), diag_(std::move(diag)), sup_(std::move(sup)) {
        const Eigen::Index n = diag_.size();
        if (sub_.size() != n || sup_.size() != n)
            throw std::invalid_argument("tridiagonal: band sizes disagree");
        factor_ = diag_;
        lower_ = Eigen::ArrayXd::Zero(n);
        for (Eigen::Index i = 1; i < n; ++i) {
            if (factor_[i - 1] == 0.0)
                throw std::runtime_error("tridiagonal: zero pivot");
            lower_[i] = sub_[i] / factor_[i - 1];
            factor_[i] = diag_[i] - lower_[i] * sup_[i - 1];
        }
    }

    Eigen::Index size() const { return factor_.size(); }

    void solve(const Eigen::Ref<const Eigen::ArrayXd>& b, Eigen::Ref<Eigen::ArrayXd> x) const {
        const Eigen::Index n = factor_.size();
        x[0] = b[0];
        for (Eigen::Index i = 1; i < n; ++i) x[i] = b[i] - lower_[i] * x[i - 1];
        x[n - 1] /= factor_[n - 1];
        for (Eigen::Index i = n - 2; i >= 0; --i)
            x[i] = (x[i] - sup_[i] * x[i + 1]) / factor_[i];
    }

private:
    Eigen::ArrayXd sub_, diag_, sup_;
    Eigen::ArrayXd factor_, lower_;
};

} // namespace netform
