#include "netform/elliptic.hpp"

#include "netform/bounds.hpp"
#include "netform/solver.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace netform {

namespace {

/// Discrete operator coefficients precomputed from m.  The identity part of
/// the conductance tensor lives on faces; the rank-one m (x) m part on cell
/// corners (2x2 node squares, arithmetic mean of m).
struct PressureOperator {
    explicit PressureOperator(const VectorField& m) : grid(m.grid) {
        if (grid.dim() == 1) {
            const int nt = grid.nodes(0);
            face_a.resize(nt - 1);
            for (int i = 0; i + 1 < nt; ++i) {
                const double mbar = 0.5 * (m.values(i, 0) + m.values(i + 1, 0));
                face_a[i] = 1.0 + mbar * mbar;
            }
            return;
        }
        const int nx = grid.nodes(0), ny = grid.nodes(1);
        corner_m1.resize(static_cast<size_t>(nx - 1) * (ny - 1));
        corner_m2.resize(corner_m1.size());
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                const Eigen::Index a = grid.index(i, j), b = grid.index(i + 1, j);
                const Eigen::Index c = grid.index(i, j + 1), d = grid.index(i + 1, j + 1);
                const size_t k = corner(i, j);
                corner_m1[k] = 0.25 * (m.values(a, 0) + m.values(b, 0) + m.values(c, 0) +
                                       m.values(d, 0));
                corner_m2[k] = 0.25 * (m.values(a, 1) + m.values(b, 1) + m.values(c, 1) +
                                       m.values(d, 1));
            }
    }

    size_t corner(int i, int j) const {
        return static_cast<size_t>(j) * (grid.nodes(0) - 1) + i;
    }

    void apply(const Eigen::ArrayXd& p, Eigen::ArrayXd& out) const {
        if (grid.dim() == 1)
            apply_1d(p, out);
        else
            apply_2d(p, out);
    }

    void apply_1d(const Eigen::ArrayXd& p, Eigen::ArrayXd& out) const {
        const int nt = grid.nodes(0);
        const double inv_h2 = 1.0 / (grid.h(0) * grid.h(0));
        out.setZero();
        for (int i = 1; i + 1 < nt; ++i)
            out[i] = (-face_a[i - 1] * p[i - 1] + (face_a[i - 1] + face_a[i]) * p[i] -
                      face_a[i] * p[i + 1]) *
                     inv_h2;
    }

    void apply_2d(const Eigen::ArrayXd& p, Eigen::ArrayXd& out) const {
        const int nx = grid.nodes(0), ny = grid.nodes(1);
        const double ihx2 = 1.0 / (grid.h(0) * grid.h(0));
        const double ihy2 = 1.0 / (grid.h(1) * grid.h(1));
        const double ihx = 0.5 / grid.h(0), ihy = 0.5 / grid.h(1);
        out.setZero();
        for (int j = 1; j + 1 < ny; ++j) {
            const Eigen::Index r = grid.index(0, j);
            for (int i = 1; i + 1 < nx; ++i)
                out[r + i] = (2.0 * p[r + i] - p[r + i - 1] - p[r + i + 1]) * ihx2 +
                             (2.0 * p[r + i] - p[r + i - nx] - p[r + i + nx]) * ihy2;
        }
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                const size_t k = corner(i, j);
                const double m1 = corner_m1[k], m2 = corner_m2[k];
                if (m1 == 0.0 && m2 == 0.0) continue;
                const Eigen::Index a = grid.index(i, j), b = a + 1;
                const Eigen::Index c = a + nx, d = c + 1;
                const double gx = (p[b] + p[d] - p[a] - p[c]) * ihx;
                const double gy = (p[c] + p[d] - p[a] - p[b]) * ihy;
                const double s = m1 * gx + m2 * gy;
                const double wx = s * m1 * ihx, wy = s * m2 * ihy;
                out[a] += -wx - wy;
                out[b] += wx - wy;
                out[c] += -wx + wy;
                out[d] += wx + wy;
            }
        // Dirichlet rows carry no equation.
        for (int i = 0; i < nx; ++i) {
            out[grid.index(i, 0)] = 0.0;
            out[grid.index(i, ny - 1)] = 0.0;
        }
        for (int j = 0; j < ny; ++j) {
            out[grid.index(0, j)] = 0.0;
            out[grid.index(nx - 1, j)] = 0.0;
        }
    }

    /// Interior tridiagonal bands (1D only).
    Tridiagonal interior_tridiagonal() const {
        const int n = grid.interior(0);
        const double inv_h2 = 1.0 / (grid.h(0) * grid.h(0));
        Eigen::ArrayXd sub(n), diag(n), sup(n);
        for (int i = 1; i <= n; ++i) {
            sub[i - 1] = -face_a[i - 1] * inv_h2;
            diag[i - 1] = (face_a[i - 1] + face_a[i]) * inv_h2;
            sup[i - 1] = -face_a[i] * inv_h2;
        }
        return Tridiagonal(std::move(sub), std::move(diag), std::move(sup));
    }

    /// Exact diagonal of the 2D operator (interior rows; 1 elsewhere).
    Eigen::ArrayXd jacobi_diagonal() const {
        const int nx = grid.nodes(0), ny = grid.nodes(1);
        const double ihx2 = 1.0 / (grid.h(0) * grid.h(0));
        const double ihy2 = 1.0 / (grid.h(1) * grid.h(1));
        const double ihx = 0.5 / grid.h(0), ihy = 0.5 / grid.h(1);
        Eigen::ArrayXd d = Eigen::ArrayXd::Ones(grid.total_nodes());
        for (int j = 1; j + 1 < ny; ++j)
            for (int i = 1; i + 1 < nx; ++i) {
                double v = 2.0 * ihx2 + 2.0 * ihy2;
                // Four adjacent corner squares; the node's gradient weights
                // are (+-ihx, +-ihy) and the quadratic form adds (m.w)^2.
                const int ci[4] = {i - 1, i, i - 1, i};
                const int cj[4] = {j - 1, j - 1, j, j};
                const double sx[4] = {1.0, -1.0, 1.0, -1.0};
                const double sy[4] = {1.0, 1.0, -1.0, -1.0};
                for (int t = 0; t < 4; ++t) {
                    const size_t k = corner(ci[t], cj[t]);
                    const double w = corner_m1[k] * sx[t] * ihx + corner_m2[k] * sy[t] * ihy;
                    v += w * w;
                }
                d[grid.index(i, j)] = v;
            }
        return d;
    }

    Grid grid;
    std::vector<double> face_a;    // 1D face coefficients 1 + mbar^2
    std::vector<double> corner_m1; // 2D corner-averaged m components
    std::vector<double> corner_m2;
};

void zero_boundary(const Grid& g, Eigen::ArrayXd& v) {
    for_each_boundary_node(g, [&](Eigen::Index k) { v[k] = 0.0; });
}

} // namespace

ScalarField apply_operator(const VectorField& m, const ScalarField& p) {
    detail::require_same_grid(m.grid, p.grid, "apply_operator");
    PressureOperator op(m);
    ScalarField out(p.grid);
    op.apply(p.values, out.values);
    return out;
}

std::pair<ScalarField, EllipticSolveReport>
solve_pressure(const VectorField& m, const ScalarField& S, double tol,
               const ScalarField* warm_start) {
    detail::require_same_grid(m.grid, S.grid, "solve_pressure");
    if (!(tol > 0.0)) throw std::invalid_argument("tol: must be positive");
    const Grid& g = m.grid;

    PressureOperator op(m);
    Eigen::ArrayXd b = S.values;
    zero_boundary(g, b);

    ScalarField p(g);
    if (warm_start != nullptr) {
        detail::require_same_grid(g, warm_start->grid, "solve_pressure warm start");
        p.values = warm_start->values;
        zero_boundary(g, p.values);
    }

    const auto apply = [&](const Eigen::ArrayXd& x, Eigen::ArrayXd& y) { op.apply(x, y); };
    const int max_iter = 50 * std::max(g.interior(0), g.dim() == 2 ? g.interior(1) : 0);

    PcgReport rep;
    if (g.dim() == 1) {
        const Tridiagonal tri = op.interior_tridiagonal();
        const int n = g.interior(0);
        Eigen::ArrayXd zi(n);
        const auto precond = [&](const Eigen::ArrayXd& r, Eigen::ArrayXd& z) {
            tri.solve(r.segment(1, n), zi);
            z.setZero();
            z.segment(1, n) = zi;
        };
        rep = pcg(apply, precond, b, p.values, tol, max_iter);
    } else {
        const Eigen::ArrayXd diag = op.jacobi_diagonal();
        const auto precond = [&](const Eigen::ArrayXd& r, Eigen::ArrayXd& z) {
            z = r / diag;
        };
        rep = pcg(apply, precond, b, p.values, tol, max_iter);
    }

    const double l2_scale = std::sqrt(g.cell_volume());
    if (!rep.converged)
        throw SolverFailure("pressure solve exceeded its iteration budget",
                            rep.residual_norm * l2_scale, rep.iterations);

    EllipticSolveReport report(g);
    report.iterations = rep.iterations;
    report.final_residual = rep.residual_norm * l2_scale;
    report.grad_p = gradient(p);
    return {std::move(p), std::move(report)};
}

ScalarField pressure_1d_oracle(const ScalarField& m, const ScalarField& S) {
    detail::require_same_grid(m.grid, S.grid, "pressure_1d_oracle");
    if (m.grid.dim() != 1)
        throw std::invalid_argument("pressure_1d_oracle: needs a 1D grid");
    const Grid& g = m.grid;
    const int nt = g.nodes(0);
    const double h = g.h(0);

    // Cumulative source integral (trapezoid).
    Eigen::ArrayXd cum(nt);
    cum[0] = 0.0;
    for (int i = 1; i < nt; ++i)
        cum[i] = cum[i - 1] + 0.5 * h * (S.values[i - 1] + S.values[i]);

    const Eigen::ArrayXd w = 1.0 / (1.0 + m.values.square());

    // Flux constant from the zero-mean constraint on p_x (trapezoid weights).
    Eigen::ArrayXd tw = Eigen::ArrayXd::Ones(nt);
    tw[0] = tw[nt - 1] = 0.5;
    const double denom = (tw * w).sum();
    const double numer = (tw * w * cum).sum();
    const double c0 = numer / denom;

    return ScalarField(g, (c0 - cum) * w);
}

W1qAuditRecord audit_w1q(const VectorField& w, const ScalarField& S, double q, double l,
                         double tol) {
    detail::require_same_grid(w.grid, S.grid, "audit_w1q");
    const int N = w.grid.dim();
    if (N != 2)
        throw std::invalid_argument("audit_w1q: needs a 2D grid (exponent algebra degenerates in 1D)");
    if (!(l > N)) throw std::invalid_argument("l: must exceed the dimension N");
    if (!(q >= static_cast<double>(N) / (N - 1)))
        throw std::invalid_argument("q: must be at least N/(N-1)");

    W1qAuditRecord rec;
    rec.q = q;
    rec.l = l;
    rec.s1 = anisotropy_exponent(N, q, l);

    auto [p, report] = solve_pressure(w, S, tol);
    rec.lhs = norm_lq(report.grad_p, q);
    rec.w_norm = norm_w1l(w, l);
    rec.rhs_core = norm_lq(report.grad_p, 1.0) + norm_lq(S, N * q / (N + q));
    if (rec.rhs_core > 0.0) {
        const double amplification =
            std::exp(rec.s1 * std::log1p(rec.w_norm)); // (1 + w_norm)^{s1}
        rec.implied_c = rec.lhs / (amplification * rec.rhs_core);
    }
    return rec;
}

} // namespace netform
