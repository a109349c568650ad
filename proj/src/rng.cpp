#include "gridstorm/rng.hpp"

#include <cmath>
#include <numbers>

namespace gridstorm {

double normal(Rng& rng, double mean, double sd) {
    // One Box-Muller pair per call; the second variate is discarded so each
    // draw consumes a fixed number of engine outputs.
    double u1 = uniform(rng, 0.0, 1.0);
    while (u1 <= 0.0) u1 = uniform(rng, 0.0, 1.0);
    const double u2 = uniform(rng, 0.0, 1.0);
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gridstorm
