#ifndef SHUFGDA_TESTS_TEST_UTIL_HPP
#define SHUFGDA_TESTS_TEST_UTIL_HPP

#include "shufgda/types.hpp"

#include <random>

namespace testutil {

inline shufgda::Vector gaussian(shufgda::Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  shufgda::Vector v(d);
  for (shufgda::Index k = 0; k < d; ++k) v(k) = g(rng);
  return v;
}

/// Random point in the interior of the simplex.
inline shufgda::Vector simplex_point(shufgda::Index n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  shufgda::Vector v(n);
  for (shufgda::Index k = 0; k < n; ++k) v(k) = e(rng) + 1e-3;
  return v / v.sum();
}

}  // namespace testutil

#endif  // SHUFGDA_TESTS_TEST_UTIL_HPP
