#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "tbprop/fock.hpp"
#include "tbprop/parallel.hpp"
#include "tbprop/propagator.hpp"

namespace tbprop {

/// Gamma_mn = <a_m^dagger a_n^dagger a_n a_m>; entries summed over m, n give 2 for two photons.
struct CorrelationMatrix {
  RMatrix gamma;
  double time = 0.0;
};

struct DisorderModel {
  /// Standard deviation of each disordered coupling phase, in radians.
  double epsilon = 0.0;
  std::size_t realizations = 100;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(std::isfinite(epsilon) && epsilon >= 0.0, "disorder epsilon must be finite and nonnegative");
    detail::require(realizations >= 1, "disorder needs at least one realization");
  }
};

/// Disorder on the phase of the single link between modes k0 and k0 + 1.
struct SingleLink {
  Mode k0{1};
};
/// Independent disorder on every link phase.
struct AllLinks {};
using DisorderTarget = std::variant<SingleLink, AllLinks>;

struct EnsembleResult {
  CorrelationMatrix mean;
  RMatrix standard_error;
  std::size_t realizations = 0;
};

namespace detail {

inline CorrelationMatrix finish_gamma(RMatrix g, double t) {
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (g(i, j) < 0.0 && g(i, j) >= -1e-12) g(i, j) = 0.0;
    }
  }
  return {std::move(g), t};
}

/// Two-photon correlations from the transfer matrix; A_mk is the amplitude from input k to output m.
inline RMatrix gamma_from_transfer(const CMatrix& a, const TwoPhotonInitial& init) {
  const Eigen::Index n = a.rows();
  const auto k = static_cast<Eigen::Index>(init.k.offset()), l = static_cast<Eigen::Index>(init.l.offset());
  RMatrix g(n, n);
  const Complex w = std::polar(1.0, init.phase);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index q = m; q < n; ++q) {
      Complex amp;
      if (init.kind == TwoPhotonInitial::Kind::Product) {
        amp = a(m, k) * a(q, l) + a(m, l) * a(q, k);
      } else {
        amp = a(m, k) * a(q, k) + w * a(m, l) * a(q, l);
      }
      g(m, q) = std::norm(amp);
      g(q, m) = g(m, q);
    }
  }
  return g;
}

inline void check_pair(const LatticeSpec& spec, Mode k0) {
  check_mode(k0, spec.n_modes, "k0");
  detail::require(k0.number() + 1 <= spec.n_modes, "k0 must leave room for mode k0 + 1");
}

/// Sum of values by pairwise halving, so the result is independent of thread scheduling.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace detail

/// Photons launched in modes k0 and k0 + 1; independent of the coupling phases.
inline CorrelationMatrix gamma_product(const LatticeSpec& spec, double t, Mode k0) {
  spec.validate();
  detail::check_pair(spec, k0);
  const auto init = TwoPhotonInitial::product(k0, Mode(k0.number() + 1));
  return detail::finish_gamma(detail::gamma_from_transfer(propagate(spec, t).entries(), init), t);
}

/// (|2_k> + |2_l>)/sqrt(2): Gamma_mn = |A_mk A_nk + A_ml A_nl|^2.
inline CorrelationMatrix gamma_superposition(const LatticeSpec& spec, double t, Mode k, Mode l) {
  spec.validate();
  check_mode(k, spec.n_modes, "k");
  check_mode(l, spec.n_modes, "l");
  detail::require(k != l, "superposition needs two distinct modes");
  const auto init = TwoPhotonInitial::superposition(k, l);
  return detail::finish_gamma(detail::gamma_from_transfer(propagate(spec, t).entries(), init), t);
}

/// Exact Gaussian average over the phase of link k0 for (|2_k0> + |2_k0+1>)/sqrt(2):
/// the interference term is damped by E[exp(2 i delta)] = exp(-2 eps^2).
inline CorrelationMatrix gamma_disorder_analytic(const LatticeSpec& spec, double t, Mode k0, double epsilon) {
  spec.validate();
  if (spec.topology != Topology::Open) throw UnsupportedError("the analytic disorder average needs an open chain");
  detail::check_pair(spec, k0);
  detail::require(std::isfinite(epsilon) && epsilon >= 0.0, "disorder epsilon must be finite and nonnegative");
  const CMatrix a = propagate(spec, t).entries();
  const auto n = a.rows();
  const auto k = static_cast<Eigen::Index>(k0.offset());
  const double damp = std::exp(-2.0 * epsilon * epsilon);
  RMatrix g(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index q = m; q < n; ++q) {
      const Complex x = a(m, k) * a(q, k), y = a(m, k + 1) * a(q, k + 1);
      g(m, q) = std::norm(x) + std::norm(y) + damp * 2.0 * (std::conj(x) * y).real();
      g(q, m) = g(m, q);
    }
  }
  return detail::finish_gamma(std::move(g), t);
}

/// Monte-Carlo average over Normal(phase, eps^2) realizations; realization r draws from
/// mt19937_64 seeded with (seed, r), so results do not depend on the thread count.
inline EnsembleResult gamma_disorder_ensemble(const LatticeSpec& spec, double t, const TwoPhotonInitial& initial,
                                              const DisorderModel& model, const DisorderTarget& target) {
  spec.validate();
  model.validate();
  check_mode(initial.k, spec.n_modes, "k");
  check_mode(initial.l, spec.n_modes, "l");
  detail::require(initial.k != initial.l, "two-photon state needs two distinct modes");
  std::vector<std::size_t> links;
  if (const auto* single = std::get_if<SingleLink>(&target)) {
    check_mode(single->k0, spec.expected_phase_count(), "disordered link");
    links.push_back(single->k0.offset());
  } else {
    for (std::size_t i = 0; i < spec.phases.size(); ++i) links.push_back(i);
  }

  const std::size_t m = model.realizations;
  const auto n = static_cast<Eigen::Index>(spec.n_modes);
  const std::size_t cells = static_cast<std::size_t>(n * n);
  std::vector<double> samples(m * cells);
  parallel_for(m, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(model.seed), static_cast<std::uint32_t>(model.seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(static_cast<std::uint64_t>(r) >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> phases = spec.phases;
    for (std::size_t i : links) phases[i] += model.epsilon * noise(rng);
    const RMatrix g = detail::gamma_from_transfer(propagate(spec.with_phases(phases), t).entries(), initial);
    for (std::size_t c = 0; c < cells; ++c) samples[c * m + r] = g.data()[c];
  });

  EnsembleResult res;
  res.realizations = m;
  RMatrix mean(n, n), se(n, n);
  for (std::size_t c = 0; c < cells; ++c) {
    const double* col = samples.data() + c * m;
    const double mu = detail::pairwise_sum(col, m) / static_cast<double>(m);
    std::vector<double> dev(m);
    for (std::size_t r = 0; r < m; ++r) dev[r] = (col[r] - mu) * (col[r] - mu);
    const double var = m > 1 ? detail::pairwise_sum(dev.data(), m) / static_cast<double>(m - 1) : 0.0;
    mean.data()[c] = mu;
    se.data()[c] = std::sqrt(var / static_cast<double>(m));
  }
  res.mean = detail::finish_gamma(std::move(mean), t);
  res.standard_error = std::move(se);
  return res;
}

/// max over m != n of Gamma_mn / sqrt(Gamma_mm Gamma_nn), skipping pairs with an empty
/// diagonal; nullopt when every pair is skipped. Values above 1 violate the classical bound.
inline std::optional<double> cauchy_schwarz_max(const CorrelationMatrix& c) {
  const auto& g = c.gamma;
  detail::require(g.rows() == g.cols(), "correlation matrix must be square");
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    detail::require(g(i, i) >= 0.0, "correlation diagonal must be nonnegative");
  }
  std::optional<double> best;
  for (Eigen::Index m = 0; m < g.rows(); ++m) {
    for (Eigen::Index n = 0; n < g.cols(); ++n) {
      if (m == n || g(m, m) < 1e-12 || g(n, n) < 1e-12) continue;
      const double r = g(m, n) / std::sqrt(g(m, m) * g(n, n));
      if (!best || r > *best) best = r;
    }
  }
  return best;
}

}  // namespace tbprop
