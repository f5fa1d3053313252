#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tbprop/errors.hpp"

namespace tbprop {

/// J_0(x)..J_{max_order}(x) by Miller's downward recurrence, normalised with
/// J_0 + 2*sum J_{2k} = 1.
inline std::vector<double> bessel_j_table(double x, std::size_t max_order) {
  if (!std::isfinite(x)) throw NumericError("Bessel argument must be finite");
  std::vector<double> out(max_order + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const bool negative = x < 0.0;
  const double ax = std::abs(x);

  const double top = std::max<double>(static_cast<double>(max_order), ax);
  auto start = static_cast<std::size_t>(top + 30.0 + std::sqrt(160.0 * top));
  if (start % 2 == 1) ++start;

  std::vector<double> j(start + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  double norm = 0.0;
  for (std::size_t k = start; k >= 1; --k) {
    j[k - 1] = 2.0 * static_cast<double>(k) / ax * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > 1e250) {
      for (std::size_t i = k - 1; i <= start; ++i) j[i] *= 1e-250;
      norm *= 1e-250;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j[k - 1];
  }
  norm += j[0];
  for (std::size_t k = 0; k <= max_order && k <= start; ++k) {
    double v = j[k] / norm;
    if (negative && k % 2 == 1) v = -v;
    out[k] = v;
  }
  return out;
}

/// J_n(x) for integer n of either sign.
inline double bessel_j(int n, double x) {
  const auto an = static_cast<std::size_t>(n < 0 ? -n : n);
  double v = bessel_j_table(x, an)[an];
  return (n < 0 && an % 2 == 1) ? -v : v;
}

}  // namespace tbprop
