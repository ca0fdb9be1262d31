#pragma once

// Closed-form estimate algebra: the exponent bookkeeping, the data-forcing
// aggregates F and G, the derived curves F1 and G1, the barrier minimum, the
// guaranteed-existence horizon solver, a-priori bound evaluators, and the
// scalar lemma kernels (parabolic sup bounds, continuation barrier, fast
// geometric convergence, p-Laplacian monotonicity).  Every power evaluation
// runs in log domain with explicit saturation to +/- infinity.

#include "netform/phys.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace netform {

/// s1 = 5 N (2l - N + N l)(N q - N) / (q (l - N)).
double anisotropy_exponent(int N, double q, double l);

/// Derived exponents.  Plain aggregate so tests can inject toy values.
struct ExponentSet {
    int N = 0;
    double q = 0, l = 0, gamma = 0;
    double s0 = 0;    // q(N+2) / (2q - N - 2)
    double alpha = 0; // (2q - N - 2) / ((q - 1)(N + 2))
    double s1 = 0;
    double s4 = 0;    // max(s0 + 2, s0 (2 gamma - 1))
    double s5 = 0;    // s1 * s4
};

/// Validates N >= 2, q > 1 + N/2, l > N, gamma > 1/2; rejects s0 > 1e12
/// (divergence as q approaches 1 + N/2).
ExponentSet exponents(int N, double q, double l, double gamma);

/// Scalar data entering the a-priori estimates.  norm_S is the space-time
/// L^{4Nq/(N+4q)} norm of the source; norm_S_2 its spatial L^2 norm.
struct EstimateInputs {
    ExponentSet exps;
    PhysParams phys;
    double norm_S = 0.0;
    double norm_S_2 = 0.0;
    double norm_m0_2 = 0.0;
    double norm_m0_inf = 0.0;
    double norm_grad_m0_inf = 0.0;
    double c = 1.0; // calibration constant in the derived curves
};

/// log F(T) and log G(T) as functions of log T (-inf allowed; returns -inf
/// when every summand vanishes).
double log_F(double log_T, const EstimateInputs& in);
double log_G(double log_T, const EstimateInputs& in);
double F_of_T(double T, const EstimateInputs& in);
double G_of_T(double T, const EstimateInputs& in);

/// Derived curves F1(T) = T^{1/4q} F(T)^{s1} ||S|| and
/// G1(T) = T^{1/4q} (G(T)^{s1} + 1) ||S||, in log domain.
double log_F1(double log_T, const EstimateInputs& in);
double log_G1(double log_T, const EstimateInputs& in);
std::pair<double, double> F1_G1(double T, const EstimateInputs& in);

/// Interior minimum of the barrier comparison function over h > 0, from the
/// curves at horizon T.  Empty when F1(T) = 0 (no interior minimum exists).
std::optional<double> g_min(double T, const EstimateInputs& in);
double g_min_from_logs(double log_F1_val, double log_G1_val, double s5, double c);

/// log Phi(log T) where Phi(T) = (s5-1) / (s5 (c s5 F1)^{1/(s5-1)} c G1);
/// the horizon is the root of Phi = 1.  Strictly decreasing in log T.
double log_phi(double log_T, const EstimateInputs& in);

struct TmaxResult {
    bool finite = true;
    double T = 0.0;            // exp(log_T); may under/overflow double range
    double log_T = 0.0;
    double phi_residual = 0.0; // Phi(T) - 1 at the returned horizon
    int iterations = 0;
};

using LogCurve = std::function<double(double)>; // log T -> log value

/// Root of Phi = 1 by bracketed bisection in log T.  Stops when
/// |Phi - 1| <= tol.  Infinite (finite = false) when the source norm or the
/// F-aggregate vanishes identically, so the estimate never binds.
TmaxResult tmax_solve(const EstimateInputs& in, double tol = 1e-12);
TmaxResult tmax_solve_from_curves(const LogCurve& logF1, const LogCurve& logG1, double s5,
                                  double c, double tol = 1e-12);

/// c T^{1/4q} (1 + ||grad m||_inf)^{s1} ||S||.
double bound_grad_p(double T, double grad_m_inf, const EstimateInputs& in);
/// c T^{s0/4q} (T^{1/2}||m0||_2 + T||S||_2) P^{s0} + c(||m0||_inf + T^{1/2}||m0||_2 + T||S||_2),
/// with P the space-time L^{4q} norm of grad p.
double bound_sup_m(double T, double grad_p_4q, const EstimateInputs& in);
/// c G(T) + c F(T) P^{s4}.
double bound_grad_m(double T, double grad_p_4q, const EstimateInputs& in);

/// Parabolic sup-norm bounds for dt u - D^2 lap u <= g u + f + div Fv, u0 >= 0.
/// WholeDomain: 4 sup u0 + c (||g||_q^{s0} + 1) ||u||_1 + 2 ||f||_q T^{1/(2 s0)} + 2 ||Fv||_{2q};
/// PositivePart: 2 sup u0 + c (||g||_q^{(q-1) s0 / (2q)} + 1) ||u+||_{2q/(q-1)}
///               + ||f||_q T^{1/(2 s0)} + ||Fv||_{2q}.
enum class DeGiorgiVariant { WholeDomain, PositivePart };

double degiorgi_bound(double sup_u0, double g_q, double u_norm, double f_q, double F_2q,
                      double T, const ExponentSet& exps, double c,
                      DeGiorgiVariant variant = DeGiorgiVariant::WholeDomain);

/// c ||grad u0||_inf + c ||f||_{2q} for the heat flow with bounded forcing.
double heat_gradient_bound(double grad_u0_inf, double f_2q, double c);

/// Continuation barrier: a continuous h >= 0 with h <= eps h^{1+delta} + b
/// stays below h0 = (eps (1+delta))^{-1/delta} provided
/// eps <= delta^delta / ((b+delta)^delta (1+delta)^{1+delta}).
double continuation_eps_threshold(double delta, double b);
double continuation_h0(double eps, double delta);
bool continuation_admissible(double eps, double delta, double b);

/// Fast geometric convergence y_{n+1} <= c b^n y_n^{1+alpha}: y_n -> 0 when
/// y_0 <= c^{-1/alpha} b^{-1/alpha^2}.  The iterate runs the equality
/// recursion.
double geometric_recursion_threshold(double c, double b, double alpha);
std::vector<double> geometric_recursion_iterate(double c, double b, double alpha, double y0, int n_max);

/// Monotonicity margin of the p-Laplacian-type vector map
/// v -> |v|^{2 gamma - 2} v; nonnegative for all x, y and gamma > 1/2.
double power_map_margin(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma);

} // namespace netform
