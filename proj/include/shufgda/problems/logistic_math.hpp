#ifndef SHUFGDA_PROBLEMS_LOGISTIC_MATH_HPP
#define SHUFGDA_PROBLEMS_LOGISTIC_MATH_HPP

#include <cmath>

namespace shufgda::problems {

/// log(1 + e^u) without overflow.
inline double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

inline double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace shufgda::problems

#endif  // SHUFGDA_PROBLEMS_LOGISTIC_MATH_HPP
