// Evolves a squeezed pentamer, prints per-mode photon numbers and the squeezing-cancellation time,
// then the two-photon correlation pattern for photons launched in the middle of a nonamer.
#include <cstdio>

#include "tbprop/tbprop.hpp"

int main() {
  using namespace tbprop;
  const auto spec = LatticeSpec::open(5);

  const auto cancel = solve_cancellation(spec, {0.0, 1.0}, {Mode(1), 0.1});
  if (cancel.found) {
    const auto xi = cancel.profile.real_parts();
    std::printf("cancellation at t = %.5f with xi = %.4f %.4f %.4f %.4f %.4f\n", cancel.t_star, xi[0], xi[1], xi[2],
                xi[3], xi[4]);
    const auto v = evolve_covariance(initial_covariance(cancel.profile), propagate(spec, cancel.t_star));
    for (std::size_t m = 1; m <= 5; ++m) {
      std::printf("  mode %zu: n = %.6f, min variance = %.6f\n", m, v.mean_photon_number(Mode(m)),
                  single_mode_squeezing(v, Mode(m)));
    }
  }

  const auto gamma = gamma_product(LatticeSpec::open(9), 1.2, Mode(5));
  std::printf("product-state correlations on a nonamer at t = 1.2:\n");
  for (Eigen::Index i = 0; i < gamma.gamma.rows(); ++i) {
    for (Eigen::Index j = 0; j < gamma.gamma.cols(); ++j) std::printf(" %.3f", gamma.gamma(i, j));
    std::printf("\n");
  }
}
