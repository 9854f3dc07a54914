#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace tvcount {

/// Engine and variate generators whose output depends only on the seed, not
/// on the standard library implementation.
using Rng = boost::random::mt19937_64;

inline double standard_normal(Rng& rng) { return boost::random::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform01(Rng& rng) { return boost::random::uniform_01<double>()(rng); }

/// Inversion for small means, PTRD transformed rejection for mean >= 10.
inline std::int64_t poisson(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    return boost::random::poisson_distribution<std::int64_t, double>(mean)(rng);
}

} // namespace tvcount
