#include "netform/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace netform {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(sum exp(t_i)) with max-shift; empty/all -inf gives -inf, any +inf
/// gives +inf.
double log_sum_exp(const std::vector<double>& terms) {
    double m = -kInf;
    for (double t : terms) {
        if (std::isnan(t)) return t;
        m = std::max(m, t);
    }
    if (m == -kInf || m == kInf) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

/// a * log_T + log(coef); drops to -inf when coef == 0 (log(0) * 0 hazards
/// avoided explicitly).
double power_term(double exponent, double log_T, double coef) {
    if (coef <= 0.0) return -kInf;
    if (exponent == 0.0) return std::log(coef);
    if (log_T == -kInf) return exponent > 0.0 ? -kInf : kInf;
    if (log_T == kInf) return exponent > 0.0 ? kInf : -kInf;
    return exponent * log_T + std::log(coef);
}

double saturating_exp(double x) { return std::exp(x); } // exp handles +/-inf

/// log(exp(u) + 1), stable for large |u|.
double log1p_exp(double u) {
    if (u == kInf) return kInf;
    if (u > 0.0) return u + std::log1p(std::exp(-u));
    return std::log1p(std::exp(u));
}

} // namespace

double anisotropy_exponent(int N, double q, double l) {
    return 5.0 * N * (2.0 * l - N + N * l) * (N * q - N) / (q * (l - N));
}

ExponentSet exponents(int N, double q, double l, double gamma) {
    if (N < 2) throw std::invalid_argument("N: must be an integer >= 2");
    if (!(q > 1.0 + N / 2.0)) throw std::invalid_argument("q: must exceed 1 + N/2");
    if (!(l > N)) throw std::invalid_argument("l: must exceed N");
    if (!(gamma > 0.5)) throw std::invalid_argument("gamma: must exceed 1/2");
    ExponentSet e;
    e.N = N;
    e.q = q;
    e.l = l;
    e.gamma = gamma;
    e.s0 = q * (N + 2.0) / (2.0 * q - N - 2.0);
    if (!(e.s0 <= 1e12))
        throw std::domain_error("s0: diverged above 1e12 (q too close to 1 + N/2)");
    e.alpha = (2.0 * q - N - 2.0) / ((q - 1.0) * (N + 2.0));
    e.s1 = anisotropy_exponent(N, q, l);
    e.s4 = std::max(e.s0 + 2.0, e.s0 * (2.0 * gamma - 1.0));
    e.s5 = e.s1 * e.s4;
    return e;
}

double log_F(double log_T, const EstimateInputs& in) {
    const double q = in.exps.q, s0 = in.exps.s0;
    const double e = 2.0 * in.exps.gamma - 1.0;
    const double a = in.norm_m0_2, b = in.norm_S_2, mi = in.norm_m0_inf;
    const double lead = s0 / (4.0 * q);
    const double lead_pow = (s0 * e + 2.0) / (4.0 * q);
    return log_sum_exp({
        power_term(lead + 0.5, log_T, a),
        power_term(lead + 1.0, log_T, b),
        power_term(0.0, log_T, mi),
        power_term(0.5, log_T, a),
        power_term(1.0, log_T, b),
        power_term(lead_pow + 0.5 * e, log_T, std::pow(a, e)),
        power_term(lead_pow + e, log_T, std::pow(b, e)),
    });
}

double log_G(double log_T, const EstimateInputs& in) {
    const double q = in.exps.q;
    const double e = 2.0 * in.exps.gamma - 1.0;
    const double a = in.norm_m0_2, b = in.norm_S_2, mi = in.norm_m0_inf;
    const double tail = 1.0 / (2.0 * q);
    return log_sum_exp({
        power_term(0.0, log_T, in.norm_grad_m0_inf),
        log_F(log_T, in),
        power_term(tail, log_T, std::pow(mi, e)),
        power_term(tail + 0.5 * e, log_T, std::pow(a, e)),
        power_term(tail + e, log_T, std::pow(b, e)),
    });
}

double F_of_T(double T, const EstimateInputs& in) {
    return saturating_exp(log_F(std::log(T), in));
}

double G_of_T(double T, const EstimateInputs& in) {
    return saturating_exp(log_G(std::log(T), in));
}

double log_F1(double log_T, const EstimateInputs& in) {
    if (in.norm_S <= 0.0) return -kInf;
    const double lf = log_F(log_T, in);
    if (lf == -kInf) return -kInf;
    return power_term(1.0 / (4.0 * in.exps.q), log_T, in.norm_S) + in.exps.s1 * lf;
}

double log_G1(double log_T, const EstimateInputs& in) {
    if (in.norm_S <= 0.0) return -kInf;
    return power_term(1.0 / (4.0 * in.exps.q), log_T, in.norm_S) +
           log1p_exp(in.exps.s1 * log_G(log_T, in));
}

std::pair<double, double> F1_G1(double T, const EstimateInputs& in) {
    const double x = std::log(T);
    return {saturating_exp(log_F1(x, in)), saturating_exp(log_G1(x, in))};
}

double g_min_from_logs(double log_F1_val, double log_G1_val, double s5, double c) {
    if (!(s5 > 1.0)) throw std::invalid_argument("s5: must exceed 1");
    if (!(c > 0.0)) throw std::invalid_argument("c: must be positive");
    const double log_first = std::log(s5 - 1.0) - std::log(s5) -
                             (std::log(c) + std::log(s5) + log_F1_val) / (s5 - 1.0);
    return -saturating_exp(log_first) + c * saturating_exp(log_G1_val);
}

std::optional<double> g_min(double T, const EstimateInputs& in) {
    const double lf1 = log_F1(std::log(T), in);
    if (lf1 == -kInf) return std::nullopt; // no interior minimum without forcing
    return g_min_from_logs(lf1, log_G1(std::log(T), in), in.exps.s5, in.c);
}

namespace {

double log_phi_from(const LogCurve& logF1, const LogCurve& logG1, double s5, double c,
                    double x) {
    return std::log(s5 - 1.0) - std::log(s5) -
           (std::log(c) + std::log(s5) + logF1(x)) / (s5 - 1.0) - std::log(c) - logG1(x);
}

} // namespace

double log_phi(double log_T, const EstimateInputs& in) {
    return log_phi_from([&](double x) { return log_F1(x, in); },
                        [&](double x) { return log_G1(x, in); }, in.exps.s5, in.c, log_T);
}

TmaxResult tmax_solve_from_curves(const LogCurve& logF1, const LogCurve& logG1, double s5,
                                  double c, double tol) {
    if (!(s5 > 1.0)) throw std::invalid_argument("s5: must exceed 1");
    if (!(c > 0.0)) throw std::invalid_argument("c: must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("tol: must be positive");

    const auto phi = [&](double x) { return log_phi_from(logF1, logG1, s5, c, x); };

    // Phi is strictly decreasing in log T; expand geometrically for a bracket.
    constexpr double x_cap = 1e6;
    double x_lo, x_hi;
    double v0 = phi(0.0);
    TmaxResult res;
    if (v0 == 0.0) {
        res.T = 1.0;
        res.log_T = 0.0;
        return res;
    }
    if (v0 > 0.0) {
        x_lo = 0.0;
        double step = 1.0;
        x_hi = step;
        while (phi(x_hi) > 0.0) {
            x_lo = x_hi;
            step *= 2.0;
            x_hi += step;
            if (x_hi > x_cap)
                throw std::runtime_error("horizon bisection: no upper bracket below exp(1e6)");
        }
    } else {
        x_hi = 0.0;
        double step = 1.0;
        x_lo = -step;
        while (phi(x_lo) < 0.0) {
            x_hi = x_lo;
            step *= 2.0;
            x_lo -= step;
            if (x_lo < -x_cap)
                throw std::runtime_error("horizon bisection: no lower bracket above exp(-1e6)");
        }
    }

    double mid = 0.5 * (x_lo + x_hi), v = 0.0;
    for (int it = 0; it < 600; ++it) {
        mid = 0.5 * (x_lo + x_hi);
        v = phi(mid);
        res.iterations = it + 1;
        if (std::abs(std::expm1(v)) <= tol) break;
        if (v > 0.0)
            x_lo = mid;
        else
            x_hi = mid;
    }
    res.T = std::exp(mid);
    res.log_T = mid;
    res.phi_residual = std::expm1(v);
    return res;
}

TmaxResult tmax_solve(const EstimateInputs& in, double tol) {
    const bool forcing_absent = in.norm_S <= 0.0;
    const bool f_vanishes =
        in.norm_m0_2 <= 0.0 && in.norm_m0_inf <= 0.0 && in.norm_S_2 <= 0.0;
    if (forcing_absent || f_vanishes) {
        TmaxResult res;
        res.finite = false;
        res.T = kInf;
        res.log_T = kInf;
        res.phi_residual = 0.0;
        return res;
    }
    return tmax_solve_from_curves([&](double x) { return log_F1(x, in); },
                                  [&](double x) { return log_G1(x, in); }, in.exps.s5, in.c,
                                  tol);
}

double bound_grad_p(double T, double grad_m_inf, const EstimateInputs& in) {
    if (in.norm_S <= 0.0) return 0.0;
    if (T <= 0.0) return 0.0;
    return saturating_exp(std::log(in.c) + std::log(T) / (4.0 * in.exps.q) +
                          in.exps.s1 * std::log1p(grad_m_inf) + std::log(in.norm_S));
}

double bound_sup_m(double T, double grad_p_4q, const EstimateInputs& in) {
    const double q = in.exps.q, s0 = in.exps.s0;
    const double growth = std::sqrt(T) * in.norm_m0_2 + T * in.norm_S_2;
    const double plain = in.c * (in.norm_m0_inf + growth);
    if (T <= 0.0 || grad_p_4q <= 0.0 || growth <= 0.0) return plain;
    return saturating_exp(std::log(in.c) + (s0 / (4.0 * q)) * std::log(T) +
                          std::log(growth) + s0 * std::log(grad_p_4q)) +
           plain;
}

double bound_grad_m(double T, double grad_p_4q, const EstimateInputs& in) {
    const double x = std::log(T);
    const double lf = log_F(x, in);
    double product = 0.0;
    if (lf != -kInf && grad_p_4q > 0.0)
        product = saturating_exp(lf + in.exps.s4 * std::log(grad_p_4q));
    return in.c * saturating_exp(log_G(x, in)) + in.c * product;
}

double degiorgi_bound(double sup_u0, double g_q, double u_norm, double f_q, double F_2q,
                      double T, const ExponentSet& exps, double c,
                      DeGiorgiVariant variant) {
    const double s0 = exps.s0;
    const double time_factor = T > 0.0 ? std::pow(T, 1.0 / (2.0 * s0)) : 0.0;
    if (variant == DeGiorgiVariant::WholeDomain) {
        const double g_pow = g_q > 0.0 ? std::pow(g_q, s0) : 0.0;
        return 4.0 * sup_u0 + c * (g_pow + 1.0) * u_norm + 2.0 * f_q * time_factor +
               2.0 * F_2q;
    }
    const double exponent = (exps.q - 1.0) * s0 / (2.0 * exps.q);
    const double g_pow = g_q > 0.0 ? std::pow(g_q, exponent) : 0.0;
    return 2.0 * sup_u0 + c * (g_pow + 1.0) * u_norm + f_q * time_factor + F_2q;
}

double heat_gradient_bound(double grad_u0_inf, double f_2q, double c) {
    return c * grad_u0_inf + c * f_2q;
}

double continuation_eps_threshold(double delta, double b) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta: must be positive");
    if (!(b > 0.0)) throw std::invalid_argument("b: must be positive");
    return std::pow(delta, delta) /
           (std::pow(b + delta, delta) * std::pow(1.0 + delta, 1.0 + delta));
}

double continuation_h0(double eps, double delta) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps: must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("delta: must be positive");
    return std::pow(eps * (1.0 + delta), -1.0 / delta);
}

bool continuation_admissible(double eps, double delta, double b) {
    return eps <= continuation_eps_threshold(delta, b) * (1.0 + 1e-12);
}

double geometric_recursion_threshold(double c, double b, double alpha) {
    if (!(c > 0.0) || !(b >= 1.0) || !(alpha > 0.0))
        throw std::invalid_argument("geometric_recursion_threshold: needs c > 0, b >= 1, alpha > 0");
    return std::exp(-std::log(c) / alpha - std::log(b) / (alpha * alpha));
}

std::vector<double> geometric_recursion_iterate(double c, double b, double alpha, double y0, int n_max) {
    std::vector<double> y;
    y.reserve(n_max + 1);
    y.push_back(y0);
    double b_pow = 1.0;
    for (int n = 0; n < n_max; ++n) {
        const double prev = y.back();
        y.push_back(prev > 0.0 ? c * b_pow * std::pow(prev, 1.0 + alpha) : 0.0);
        b_pow *= b;
    }
    return y;
}

namespace {
Eigen::VectorXd power_map(const Eigen::VectorXd& v, double gamma) {
    const double r = v.norm();
    if (r == 0.0) return Eigen::VectorXd::Zero(v.size());
    return std::pow(r, 2.0 * gamma - 2.0) * v;
}
} // namespace

double power_map_margin(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma) {
    if (!(gamma > 0.5)) throw std::invalid_argument("gamma: must exceed 1/2");
    if (x.size() != y.size()) throw std::invalid_argument("power_map_margin: dimension mismatch");
    const Eigen::VectorXd diff = x - y;
    const double pairing = (power_map(x, gamma) - power_map(y, gamma)).dot(diff);
    const double d = diff.norm();
    if (gamma >= 1.0)
        return pairing - std::pow(d, 2.0 * gamma) / std::pow(2.0, 2.0 * gamma - 1.0);
    const double radius = x.norm() + y.norm();
    const double weight = radius > 0.0 ? std::pow(radius, 2.0 - 2.0 * gamma) : 0.0;
    return weight * pairing - (2.0 * gamma - 1.0) * d * d;
}

} // namespace netform
