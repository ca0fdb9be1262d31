#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netform/bounds.hpp"
#include "netform/rng.hpp"

#include <cmath>
#include <limits>

using namespace netform;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Unit data for the reference parameter point N=3, q=3, l=6, gamma=1.
EstimateInputs unit_inputs() {
    EstimateInputs in;
    in.exps = exponents(3, 3.0, 6.0, 1.0);
    in.phys = PhysParams{1.0, 1.0, 1.0};
    in.norm_S = 1.0;
    in.norm_S_2 = 1.0;
    in.norm_m0_2 = 1.0;
    in.norm_m0_inf = 1.0;
    in.norm_grad_m0_inf = 1.0;
    in.c = 1.0;
    return in;
}

} // namespace

TEST_CASE("exponent set at the reference parameter point") {
    const ExponentSet e = exponents(3, 3.0, 6.0, 1.0);
    CHECK(e.s0 == 15.0);
    CHECK(e.alpha == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(e.s1 == 270.0);
    CHECK(e.s4 == 17.0);
    CHECK(e.s5 == 4590.0);
}

TEST_CASE("exponent set algebraic identities and validation") {
    // gamma = 1 makes the absorption branch of s4 equal s0, so s4 = s0 + 2.
    const ExponentSet e = exponents(2, 4.0, 6.0, 1.0);
    CHECK(e.s0 == doctest::Approx(4.0));
    CHECK(e.s4 == doctest::Approx(e.s0 + 2.0));
    // Large gamma switches the max to the absorption branch.
    const ExponentSet g = exponents(2, 4.0, 6.0, 3.0);
    CHECK(g.s4 == doctest::Approx(g.s0 * 5.0));

    CHECK_THROWS_AS(exponents(1, 3.0, 6.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(exponents(3, 2.5, 6.0, 1.0), std::invalid_argument); // q = 1 + N/2
    CHECK_THROWS_AS(exponents(3, 3.0, 3.0, 1.0), std::invalid_argument); // l = N
    CHECK_THROWS_AS(exponents(3, 3.0, 6.0, 0.5), std::invalid_argument);
    // q just above the critical value blows s0 past the guard.
    CHECK_THROWS_AS(exponents(2, 2.0 + 1e-13, 6.0, 1.0), std::domain_error);
}

TEST_CASE("data aggregates at unit data and unit horizon") {
    const EstimateInputs in = unit_inputs();
    CHECK(F_of_T(1.0, in) == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(G_of_T(1.0, in) == doctest::Approx(11.0).epsilon(1e-14));
}

TEST_CASE("aggregate limits at zero horizon") {
    EstimateInputs in = unit_inputs();
    // Only the horizon-free summand survives as T -> 0.
    CHECK(F_of_T(0.0, in) == doctest::Approx(in.norm_m0_inf).epsilon(1e-14));
    in.norm_m0_inf = 0.0;
    CHECK(F_of_T(0.0, in) == 0.0);
    // G keeps the initial-gradient term as well.
    CHECK(G_of_T(0.0, in) == doctest::Approx(in.norm_grad_m0_inf).epsilon(1e-14));
}

TEST_CASE("aggregates vanish with the data") {
    EstimateInputs in = unit_inputs();
    in.norm_m0_2 = in.norm_S_2 = in.norm_m0_inf = in.norm_grad_m0_inf = 0.0;
    CHECK(F_of_T(1.0, in) == 0.0);
    CHECK(G_of_T(1.0, in) == 0.0);
    CHECK(log_F(0.0, in) == -inf);
}

TEST_CASE("aggregates increase in the horizon and in every datum") {
    const EstimateInputs base = unit_inputs();
    CHECK(F_of_T(2.0, base) > F_of_T(1.0, base));
    CHECK(G_of_T(2.0, base) > G_of_T(1.0, base));
    for (int field = 0; field < 4; ++field) {
        EstimateInputs bigger = base;
        (field == 0   ? bigger.norm_m0_2
         : field == 1 ? bigger.norm_S_2
         : field == 2 ? bigger.norm_m0_inf
                      : bigger.norm_grad_m0_inf) = 2.0;
        CHECK(G_of_T(1.0, bigger) > G_of_T(1.0, base));
        if (field < 3) CHECK(F_of_T(1.0, bigger) > F_of_T(1.0, base));
    }
}

TEST_CASE("derived curves at a toy anisotropy exponent") {
    EstimateInputs in = unit_inputs();
    in.exps.s1 = 2.0; // plain aggregate: inject a toy exponent
    const auto [f1, g1] = F1_G1(1.0, in);
    CHECK(f1 == doctest::Approx(49.0).epsilon(1e-13));  // F(1)^2 = 49
    CHECK(g1 == doctest::Approx(122.0).epsilon(1e-13)); // G(1)^2 + 1 = 122

    const auto [f0, g0] = F1_G1(0.0, in);
    CHECK(f0 == 0.0);
    CHECK(g0 == 0.0);

    in.norm_S = 0.0;
    const auto [fs, gs] = F1_G1(1.0, in);
    CHECK(fs == 0.0);
    CHECK(gs == 0.0);
}

TEST_CASE("derived curves increase in the horizon") {
    const EstimateInputs in = unit_inputs();
    CHECK(log_F1(1.0, in) > log_F1(0.0, in));
    CHECK(log_G1(1.0, in) > log_G1(0.0, in));
}

TEST_CASE("barrier minimum from toy logs") {
    // s5 = 2, c = 1, F1 = 1, G1 = 0.1:
    //   -( (s5-1)/s5 ) * (c s5 F1)^{-1/(s5-1)} "
    //   = -(1/2)(1/2) + 0.1 = -0.15.
    const double v = g_min_from_logs(std::log(1.0), std::log(0.1), 2.0, 1.0);
    CHECK(v == doctest::Approx(-0.15).epsilon(1e-12));
    CHECK_THROWS_AS(g_min_from_logs(0.0, 0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(g_min_from_logs(0.0, 0.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("barrier minimum over the data curves") {
    EstimateInputs in = unit_inputs();
    const auto v = g_min(1.0, in);
    REQUIRE(v.has_value());
    // Larger data can only raise the minimum through G1.
    EstimateInputs louder = in;
    louder.norm_grad_m0_inf = 5.0;
    const auto w = g_min(1.0, louder);
    REQUIRE(w.has_value());
    CHECK(*w > *v);

    // No forcing aggregate -> no interior minimum.
    EstimateInputs hollow = in;
    hollow.norm_m0_2 = hollow.norm_S_2 = hollow.norm_m0_inf = 0.0;
    CHECK(!g_min(1.0, hollow).has_value());
}

TEST_CASE("horizon root of the toy barrier curves") {
    // F1(T) = G1(T) = T, s5 = 2, c = 1:
    // Phi(T) = 1/(4 T^2), root T = 1/2.
    const LogCurve identity = [](double x) { return x; };
    const TmaxResult res = tmax_solve_from_curves(identity, identity, 2.0, 1.0, 1e-13);
    CHECK(res.finite);
    CHECK(res.T == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(res.phi_residual) <= 1e-13);
    CHECK(res.iterations > 0);

    CHECK_THROWS_AS(tmax_solve_from_curves(identity, identity, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(tmax_solve_from_curves(identity, identity, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(tmax_solve_from_curves(identity, identity, 2.0, 1.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("horizon for unit physical data is positive, minuscule, and verified") {
    const EstimateInputs in = unit_inputs();
    const TmaxResult res = tmax_solve(in, 1e-12);
    CHECK(res.finite);
    // The enormous exponent s5 = 4590 drives the horizon far below the
    // representable range; the log-domain root is still well-conditioned.
    CHECK(res.log_T < -1000.0);
    CHECK(res.log_T > -10000.0);
    CHECK(std::abs(res.phi_residual) <= 1e-12);
    // Cross-check: the barrier minimum vanishes exactly at the horizon.
    const double gm = g_min_from_logs(log_F1(res.log_T, in), log_G1(res.log_T, in),
                                      in.exps.s5, in.c);
    CHECK(std::abs(gm) <= 1e-9 * std::exp(log_G1(res.log_T, in)));
    // Phi decreases in log T.
    CHECK(log_phi(res.log_T - 1.0, in) > log_phi(res.log_T, in));
    CHECK(log_phi(res.log_T + 1.0, in) < log_phi(res.log_T, in));
}

TEST_CASE("horizon is infinite exactly when the estimate never binds") {
    EstimateInputs in = unit_inputs();
    in.norm_S = 0.0;
    TmaxResult res = tmax_solve(in);
    CHECK(!res.finite);
    CHECK(res.T == inf);

    in = unit_inputs();
    in.norm_m0_2 = in.norm_m0_inf = in.norm_S_2 = 0.0;
    res = tmax_solve(in);
    CHECK(!res.finite);
}

TEST_CASE("horizon shrinks when any datum grows") {
    const EstimateInputs base = unit_inputs();
    const double ref = tmax_solve(base).log_T;
    for (int field = 0; field < 3; ++field) {
        EstimateInputs bigger = base;
        (field == 0   ? bigger.norm_S
         : field == 1 ? bigger.norm_grad_m0_inf
                      : bigger.c) = 3.0;
        CHECK(tmax_solve(bigger).log_T < ref);
    }
}

TEST_CASE("a-priori bound evaluators at frozen points") {
    EstimateInputs in = unit_inputs();
    SUBCASE("pressure gradient") {
        in.exps.s1 = 2.0;
        // c T^{1/4q} (1 + g)^{s1} ||S|| with T = 1, g = 1: 2^2 = 4.
        CHECK(bound_grad_p(1.0, 1.0, in) == doctest::Approx(4.0).epsilon(1e-13));
        CHECK(bound_grad_p(0.0, 1.0, in) == 0.0);
        in.norm_S = 0.0;
        CHECK(bound_grad_p(1.0, 1.0, in) == 0.0);
    }
    SUBCASE("conductance sup") {
        // growth = sqrt(T) a + T b = 2; c T^{s0/4q} growth P^{s0} + c (mi + growth) = 2 + 3.
        CHECK(bound_sup_m(1.0, 1.0, in) == doctest::Approx(5.0).epsilon(1e-13));
        // T = 0 keeps only the plain term c * mi.
        CHECK(bound_sup_m(0.0, 1.0, in) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("conductance gradient") {
        // c G(1) + c F(1) P^{s4} with P = 1: 11 + 7 = 18.
        CHECK(bound_grad_m(1.0, 1.0, in) == doctest::Approx(18.0).epsilon(1e-13));
        in.norm_m0_inf = 0.0;
        // At T = 0 only the initial gradient survives inside G.
        CHECK(bound_grad_m(0.0, 1.0, in) ==
              doctest::Approx(in.c * in.norm_grad_m0_inf).epsilon(1e-13));
    }
}

TEST_CASE("parabolic sup bounds at frozen points") {
    const ExponentSet e = exponents(2, 4.0, 6.0, 1.0); // s0 = 4
    SUBCASE("whole domain, trivial data") {
        CHECK(degiorgi_bound(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, e, 1.0) == doctest::Approx(4.0));
        CHECK(degiorgi_bound(0.0, 0.0, 1.0, 0.0, 0.0, 1.0, e, 1.0) == doctest::Approx(1.0));
    }
    SUBCASE("whole domain, full data") {
        // 4*1 + 0.5*(2^4 + 1)*3 + 2*4*16^{1/8} + 2*5.
        const double v = degiorgi_bound(1.0, 2.0, 3.0, 4.0, 5.0, 16.0, e, 0.5);
        CHECK(v == doctest::Approx(50.813708498984761).epsilon(1e-14));
    }
    SUBCASE("positive part, full data") {
        // 2*1 + 0.5*(2^{1.5} + 1)*3 + 4*16^{1/8} + 5.
        const double v = degiorgi_bound(1.0, 2.0, 3.0, 4.0, 5.0, 16.0, e, 0.5,
                                        DeGiorgiVariant::PositivePart);
        CHECK(v == doctest::Approx(18.399494936611665).epsilon(1e-14));
    }
    SUBCASE("heat gradient") {
        CHECK(heat_gradient_bound(2.0, 3.0, 0.5) == doctest::Approx(2.5));
    }
}

TEST_CASE("continuation barrier threshold") {
    // delta = 1, b = 1: threshold = 1/((1+1)^1 (2)^2) = 1/8; h0 = 1/(2 eps).
    CHECK(continuation_eps_threshold(1.0, 1.0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(continuation_h0(0.125, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(continuation_admissible(0.124, 1.0, 1.0));
    CHECK(continuation_admissible(0.125, 1.0, 1.0));
    CHECK(!continuation_admissible(0.126, 1.0, 1.0));
    CHECK_THROWS_AS(continuation_eps_threshold(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(continuation_h0(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("geometric recursion threshold and decay") {
    CHECK(geometric_recursion_threshold(1.0, 2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(geometric_recursion_threshold(0.0, 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(geometric_recursion_threshold(1.0, 0.5, 1.0), std::invalid_argument);

    SUBCASE("at the threshold the equality recursion halves each step") {
        const std::vector<double> y = geometric_recursion_iterate(1.0, 2.0, 1.0, 0.5, 60);
        REQUIRE(y.size() == 61);
        for (int n = 0; n <= 60; ++n)
            CHECK(y[n] == doctest::Approx(0.5 * std::pow(2.0, -n)).epsilon(1e-12));
        CHECK(y.back() < 1e-10);
    }

    SUBCASE("slightly above the threshold the recursion explodes") {
        const std::vector<double> y = geometric_recursion_iterate(1.0, 2.0, 1.0, 0.75, 60);
        double top = 0.0;
        for (double v : y) top = std::max(top, v);
        CHECK(top > 1e6);
    }

    SUBCASE("below the threshold the decay law dominates the iterates") {
        Rng rng(77);
        for (int rep = 0; rep < 50; ++rep) {
            const double c = std::exp(rng.uniform(-1.0, 1.0));
            const double b = 1.0 + 3.0 * rng.uniform();
            const double alpha = 0.3 + rng.uniform();
            const double thr = geometric_recursion_threshold(c, b, alpha);
            const double y0 = thr * rng.uniform();
            const std::vector<double> y = geometric_recursion_iterate(c, b, alpha, y0, 40);
            for (int n = 0; n < static_cast<int>(y.size()); ++n)
                CHECK(y[n] <= thr * std::pow(b, -n / alpha) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("power-map monotonicity margin at hand-computed points") {
    Eigen::VectorXd x(1), y(1);
    x << 2.0;
    y << 1.0;
    // gamma = 2: (8-1)(2-1) - 1/2^3 = 6.875.
    CHECK(power_map_margin(x, y, 2.0) == doctest::Approx(6.875).epsilon(1e-14));

    x << 4.0;
    // gamma = 3/4: (4+1)^{1/2} (2-1)(4-1) - (1/2)(3^2) = 3 sqrt(5) - 4.5.
    CHECK(power_map_margin(x, y, 0.75) ==
          doctest::Approx(3.0 * std::sqrt(5.0) - 4.5).epsilon(1e-13));

    CHECK(power_map_margin(y, y, 2.0) == 0.0);
    CHECK(power_map_margin(y, y, 0.75) == 0.0);
    CHECK_THROWS_AS(power_map_margin(x, y, 0.5), std::invalid_argument);
    Eigen::VectorXd z(2);
    z << 1.0, 1.0;
    CHECK_THROWS_AS(power_map_margin(x, z, 1.0), std::invalid_argument);
}

TEST_CASE("power-map margin is nonnegative on random samples") {
    Rng rng(99);
    const double gammas[] = {0.6, 0.75, 1.0, 1.5, 2.0, 3.0};
    for (double gamma : gammas)
        for (int dim = 1; dim <= 3; ++dim)
            for (int rep = 0; rep < 200; ++rep) {
                Eigen::VectorXd x(dim), y(dim);
                for (int i = 0; i < dim; ++i) {
                    x[i] = rng.uniform(-3.0, 3.0);
                    y[i] = rng.uniform(-3.0, 3.0);
                }
                const double scale = std::pow(1.0 + x.norm() + y.norm(), 2.0 * gamma);
                CHECK(power_map_margin(x, y, gamma) >= -1e-12 * scale);
            }
}
