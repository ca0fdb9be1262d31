#pragma once

// Seeded synthetic smooth fields: truncated trigonometric series with random
// coefficients, used by audits, property tests, and ensemble drivers.

#include "netform/grid.hpp"
#include "netform/rng.hpp"

#include <cmath>
#include <numbers>

namespace netform {

/// Smooth random scalar field.  With `dirichlet` the series is pure sine
/// products, so the field vanishes identically on the boundary; otherwise
/// cosine modes and a constant offset are included.  Coefficients decay with
/// mode number; sup amplitude is O(amp).
inline ScalarField random_smooth_scalar(const Grid& g, Rng& rng, int modes, double amp,
                                        bool dirichlet) {
    constexpr double pi = std::numbers::pi;
    ScalarField out(g);
    if (g.dim() == 1) {
        const double l = g.extent(0);
        for (int k = 1; k <= modes; ++k) {
            const double a = rng.uniform(-amp, amp) / k;
            const double b = dirichlet ? 0.0 : rng.uniform(-amp, amp) / k;
            for (int i = 0; i < g.nodes(0); ++i) {
                const double x = g.coord(0, i);
                out.values[i] += a * std::sin(k * pi * x / l) + b * std::cos(k * pi * x / l);
            }
        }
        if (!dirichlet) out.values += rng.uniform(-amp, amp);
        else force_dirichlet(out);  // snap the ~1e-16 sine tails to exact zeros
        return out;
    }
    const double lx = g.extent(0), ly = g.extent(1);
    for (int k = 1; k <= modes; ++k)
        for (int m = 1; m <= modes; ++m) {
            const double ass = rng.uniform(-amp, amp) / (k + m - 1);
            const double acc = dirichlet ? 0.0 : rng.uniform(-amp, amp) / (k + m - 1);
            for (int j = 0; j < g.nodes(1); ++j) {
                const double y = g.coord(1, j);
                const double sy = std::sin(m * pi * y / ly), cy = std::cos(m * pi * y / ly);
                for (int i = 0; i < g.nodes(0); ++i) {
                    const double x = g.coord(0, i);
                    out.values[g.index(i, j)] +=
                        ass * std::sin(k * pi * x / lx) * sy +
                        acc * std::cos(k * pi * x / lx) * cy;
                }
            }
        }
    if (!dirichlet) out.values += rng.uniform(-amp, amp);
    else force_dirichlet(out);  // snap the ~1e-16 sine tails to exact zeros
    return out;
}

/// Smooth random vector field vanishing on the boundary (per-component sine
/// series).
inline VectorField random_smooth_vector(const Grid& g, Rng& rng, int modes, double amp) {
    VectorField out(g);
    for (int c = 0; c < g.dim(); ++c)
        out.values.col(c) = random_smooth_scalar(g, rng, modes, amp, true).values;
    return out;
}

} // namespace netform
