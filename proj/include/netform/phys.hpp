#pragma once

#include <cmath>
#include <stdexcept>

namespace netform {

/// Physical constants of the transport model: diffusion D, activation E,
/// absorption exponent gamma (D, E in (0, inf), gamma in (1/2, inf)).
struct PhysParams {
    double D = 1.0;
    double E = 1.0;
    double gamma = 1.0;

    void validate() const {
        if (!(D > 0.0) || !std::isfinite(D))
            throw std::invalid_argument("phys.D: must be in (0, inf)");
        if (!(E > 0.0) || !std::isfinite(E))
            throw std::invalid_argument("phys.E: must be in (0, inf)");
        if (!(gamma > 0.5) || !std::isfinite(gamma))
            throw std::invalid_argument("phys.gamma: must be in (1/2, inf)");
    }
};

} // namespace netform
