#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "tbprop/errors.hpp"

namespace tbprop {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// 1-based mode (site) index as used by the public API.
class Mode {
 public:
  constexpr explicit Mode(std::size_t number) : number_(number) {}

  constexpr std::size_t number() const { return number_; }
  /// 0-based storage offset.
  constexpr std::size_t offset() const { return number_ - 1; }

  auto operator<=>(const Mode&) const = default;

 private:
  std::size_t number_;
};

inline void check_mode(Mode m, std::size_t n_modes, const char* what = "mode") {
  if (m.number() < 1 || m.number() > n_modes) {
    throw ValidationError(std::string(what) + " index " + std::to_string(m.number()) +
                          " outside 1.." + std::to_string(n_modes));
  }
}

}  // namespace tbprop
