#include "mcstop/rng.hpp"

#include <cmath>

#include "mcstop/core.hpp"

namespace mcstop {

double draw_normal(UniformSource& u) { return normal_quantile(u.next()); }

double draw_exponential(UniformSource& u, double mean) {
    // F^{-1}(v) = -mean * log(1 - v); v never reaches 1 so this stays finite.
    return -mean * std::log1p(-u.next());
}

double draw_uniform(UniformSource& u, double lo, double hi) { return lo + (hi - lo) * u.next(); }

}  // namespace mcstop
