#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "tbprop/bessel.hpp"
#include "tbprop/lattice.hpp"

namespace tbprop {

enum class Provenance { AnalyticOpen, AnalyticClosedTrig, AnalyticClosedBessel, Oracle };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::AnalyticOpen: return "analytic-open";
    case Provenance::AnalyticClosedTrig: return "analytic-closed-trig";
    case Provenance::AnalyticClosedBessel: return "analytic-closed-bessel";
    case Provenance::Oracle: return "oracle";
  }
  return "unknown";
}

/// The unitary A(t) = exp(-i t C) mapping input to output mode operators.
class TransferMatrix {
 public:
  TransferMatrix(CMatrix entries, double time, Provenance provenance)
      : entries_(std::move(entries)), time_(time), provenance_(provenance) {}

  const CMatrix& entries() const { return entries_; }
  double time() const { return time_; }
  Provenance provenance() const { return provenance_; }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  Complex operator()(Mode m, Mode n) const { return entries_(m.offset(), n.offset()); }

  /// max |(A^dagger A - I)_{ij}|
  double unitarity_residual() const {
    const auto n = entries_.rows();
    return (entries_.adjoint() * entries_ - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  }

 private:
  CMatrix entries_;
  double time_;
  Provenance provenance_;
};

struct BesselSeriesConfig {
  double tail_tolerance = 1e-12;
  std::size_t max_terms = 256;

  void validate() const {
    detail::require(tail_tolerance > 0.0 && tail_tolerance < 1e-6,
                    "tail_tolerance must lie in (0, 1e-6)");
    detail::require(max_terms >= 8, "max_terms must be at least 8");
  }
};

inline TransferMatrix open_transfer(const LatticeSpec& spec, double t) {
  spec.validate();
  if (spec.topology != Topology::Open) {
    throw UnsupportedError("open_transfer requires an open chain");
  }
  const auto n = static_cast<Eigen::Index>(spec.n_modes);
  const double ct = spec.amplitude * t;
  const double h = kPi / static_cast<double>(n + 1);

  RMatrix s(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      s(m, k) = std::sin(static_cast<double>((m + 1) * (k + 1)) * h);
    }
  }
  CVector e(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    e(k) = std::polar(1.0, -2.0 * std::cos(static_cast<double>(k + 1) * h) * ct);
  }
  CMatrix b = (s.cast<Complex>() * e.asDiagonal() * s.cast<Complex>()) *
              (2.0 / static_cast<double>(n + 1));

  const PhaseTable phases = phase_table(spec);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double phi = phases.cumulative(m) - phases.cumulative(k);
      if (phi != 0.0) b(m, k) *= std::polar(1.0, -phi);
    }
  }
  return TransferMatrix(std::move(b), t, Provenance::AnalyticOpen);
}

namespace detail {

/// Builds the circulant A_{m,n} = row[(n-m) mod N].
inline CMatrix cycle_rows(const CVector& row) {
  const auto n = row.size();
  CMatrix a(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) a(m, k) = row(((k - m) % n + n) % n);
  }
  return a;
}

/// Lazily extended table of J_b(x).
class BesselCache {
 public:
  explicit BesselCache(double x) : x_(x) { grow(static_cast<std::size_t>(std::abs(x)) + 64); }
  double operator()(std::size_t b) {
    if (b >= table_.size()) grow(2 * b + 16);
    return table_[b];
  }
  double x() const { return x_; }

 private:
  void grow(std::size_t order) { table_ = bessel_j_table(x_, order); }
  double x_;
  std::vector<double> table_;
};

/// Accumulates a Bessel series term by term and decides when the tail is negligible.
class SeriesBudget {
 public:
  SeriesBudget(const BesselSeriesConfig& cfg, double x) : cfg_(cfg), x_(std::abs(x)) {}
  /// Returns true once the series may stop after a term of order b with value jb.
  bool done(std::size_t b, double jb) {
    ++terms_;
    if (static_cast<double>(b) > x_ && std::abs(jb) < cfg_.tail_tolerance) return true;
    if (terms_ >= cfg_.max_terms) {
      throw TruncationError("Bessel series did not converge within " +
                                std::to_string(cfg_.max_terms) + " terms; tail bound " +
                                std::to_string(std::abs(jb)),
                            std::abs(jb));
    }
    return false;
  }

 private:
  BesselSeriesConfig cfg_;
  double x_;
  std::size_t terms_ = 0;
};

inline int parity_sign(std::size_t b) { return b % 2 == 0 ? 1 : -1; }

/// Sign function sigma_{N,n,l} evaluated on the l-th element b of the merged index set.
inline int closed_sign(std::size_t nn, std::size_t n, std::size_t l, std::size_t b) {
  if (nn % 2 == 0) {
    if (n % 2 == 1) return 1;
    return l % 2 == 1 ? 1 : -1;
  }
  if (n % 2 == 0) return (b % (2 * nn)) == (2 * nn - n + 1) % (2 * nn) ? -1 : 1;
  return (b % (2 * nn)) == (nn - n + 1) % (2 * nn) ? -1 : 1;
}

/// alpha^(2)_{N,n}; with reflect set, applies the parity conjugation P_c termwise.
inline Complex alpha2(std::size_t nn, std::size_t n, double theta, BesselCache& jc,
                      const BesselSeriesConfig& cfg, bool reflect) {
  SeriesBudget budget(cfg, jc.x());
  Complex sum = 0.0;
  for (std::size_t l = 1;; ++l) {
    const std::size_t b = (l % 2 == 1) ? (n - 1) + nn * ((l - 1) / 2) : (nn - n + 1) + nn * (l / 2 - 1);
    const int sigma = closed_sign(nn, n, l, b);
    double exponent = (l % 2 == 1 ? 1.0 : -1.0) * static_cast<double>(b) * theta;
    double coeff = sigma;
    if (reflect) {
      exponent = -exponent;
      coeff *= parity_sign(b);
    }
    const double jb = jc(b);
    sum += coeff * std::polar(1.0, exponent) * jb;
    if (budget.done(b, jb)) break;
  }
  return sum;
}

inline Complex alpha0(std::size_t nn, double theta, BesselCache& jc, const BesselSeriesConfig& cfg) {
  SeriesBudget budget(cfg, jc.x());
  Complex sum = -jc(0);
  for (std::size_t l = 0;; ++l) {
    const std::size_t b = l * nn;
    const double jb = jc(b);
    sum += 2.0 * std::cos(static_cast<double>(b) * theta) * jb;
    if (budget.done(b, jb)) break;
  }
  return sum;
}

inline Complex alpha1(std::size_t nn, double theta, BesselCache& jc, const BesselSeriesConfig& cfg) {
  SeriesBudget budget(cfg, jc.x());
  Complex sum = -jc(0);
  for (std::size_t l = 0;; ++l) {
    const std::size_t be = 2 * l * nn;
    const std::size_t bo = (2 * l + 1) * nn;
    const double je = jc(be);
    const double jo = jc(bo);
    sum += 2.0 * std::cos(static_cast<double>(be) * theta) * je;
    sum += 2.0 * kI * std::sin(static_cast<double>(bo) * theta) * jo;
    if (budget.done(bo, jo) && std::abs(je) < cfg.tail_tolerance) break;
  }
  return sum;
}

/// alpha^(3) (cosine) or alpha^(4) (sine) for the antipodal column of an even ring.
inline Complex alpha34(std::size_t nn, double theta, BesselCache& jc, const BesselSeriesConfig& cfg,
                       bool sine) {
  SeriesBudget budget(cfg, jc.x());
  Complex sum = 0.0;
  for (std::size_t l = 0;; ++l) {
    const std::size_t b = nn * (2 * l + 1) / 2;
    const double jb = jc(b);
    const double arg = static_cast<double>(b) * theta;
    sum += sine ? 2.0 * kI * std::sin(arg) * jb : Complex(2.0 * std::cos(arg) * jb);
    if (budget.done(b, jb)) break;
  }
  return sum;
}

}  // namespace detail

/// First row of the ring propagator for real couplings; rows are cycled copies.
inline TransferMatrix closed_transfer_trig(const LatticeSpec& spec, double t) {
  spec.validate();
  if (spec.topology != Topology::Closed) {
    throw UnsupportedError("closed_transfer_trig requires a closed ring");
  }
  for (double d : spec.phases) {
    if (d != 0.0) {
      throw UnsupportedError(
          "closed_transfer_trig needs zero coupling phases; use closed_transfer_bessel "
          "(equal phases) or exp_oracle (general phases)");
    }
  }
  const std::size_t nn = spec.n_modes;
  const double ct = spec.amplitude * t;
  const double fn = static_cast<double>(nn);
  CVector row(static_cast<Eigen::Index>(nn));
  for (std::size_t n = 1; n <= nn; ++n) {
    const double p = static_cast<double>(n - 1);
    Complex v = 0.0;
    if (nn % 2 == 1) {
      v = std::polar(1.0, -2.0 * ct) / fn;
      for (std::size_t k = 1; k <= (nn - 1) / 2; ++k) {
        const double fk = static_cast<double>(k);
        const double sign = ((n - 1) * k) % 2 == 0 ? 1.0 : -1.0;
        const double ksign = k % 2 == 0 ? 1.0 : -1.0;
        v += (2.0 / fn) * sign * std::cos(p * fk * kPi / fn) *
             std::polar(1.0, -ksign * 2.0 * ct * std::cos(fk * kPi / fn));
      }
    } else {
      for (std::size_t k = 0; k < nn; ++k) {
        const double fk = static_cast<double>(k);
        const double w = std::cos(p * fk * 2.0 * kPi / fn);
        const double arg = 2.0 * ct * std::cos(2.0 * kPi * fk / fn);
        v += (n % 2 == 1) ? Complex(w * std::cos(arg)) : -kI * w * std::sin(arg);
      }
      v /= fn;
    }
    row(static_cast<Eigen::Index>(n - 1)) = v;
  }
  return TransferMatrix(detail::cycle_rows(row), t, Provenance::AnalyticClosedTrig);
}

/// Ring propagator for equal coupling phases from the Bessel-series case table.
inline TransferMatrix closed_transfer_bessel(const LatticeSpec& spec, double t,
                                             const BesselSeriesConfig& cfg = {}) {
  spec.validate();
  cfg.validate();
  if (spec.topology != Topology::Closed) {
    throw UnsupportedError("closed_transfer_bessel requires a closed ring");
  }
  if (!spec.uniform_phase()) {
    throw UnsupportedError("closed_transfer_bessel needs equal phases on every link; use exp_oracle");
  }
  const std::size_t nn = spec.n_modes;
  const double theta = spec.phases.front() - kPi / 2.0;
  detail::BesselCache jc(2.0 * spec.amplitude * t);
  CVector row(static_cast<Eigen::Index>(nn));
  for (std::size_t n = 1; n <= nn; ++n) {
    Complex v;
    if (nn % 2 == 1) {
      if (n == 1) {
        v = detail::alpha1(nn, theta, jc, cfg);
      } else if (n <= (nn + 1) / 2) {
        v = detail::alpha2(nn, n, theta, jc, cfg, false);
      } else {
        v = detail::alpha2(nn, nn - n + 2, theta, jc, cfg, true);
      }
    } else {
      if (n == 1) {
        v = detail::alpha0(nn, theta, jc, cfg);
      } else if (n <= nn / 2) {
        v = detail::alpha2(nn, n, theta, jc, cfg, false);
      } else if (n == nn / 2 + 1) {
        v = detail::alpha34(nn, theta, jc, cfg, n % 2 == 0);
      } else {
        v = std::conj(detail::alpha2(nn, nn - n + 2, theta, jc, cfg, false));
        if (n % 2 == 0) v = -v;
      }
    }
    row(static_cast<Eigen::Index>(n - 1)) = v;
  }
  return TransferMatrix(detail::cycle_rows(row), t, Provenance::AnalyticClosedBessel);
}

/// Reference propagator from a Hermitian eigendecomposition; any graph, any phases.
inline TransferMatrix exp_oracle(const CouplingMatrix& coupling, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(coupling.entries());
  if (eig.info() != Eigen::Success) {
    throw NumericError("Hermitian eigendecomposition failed (matrix size " +
                       std::to_string(coupling.size()) + ", max |entry| " +
                       std::to_string(coupling.entries().cwiseAbs().maxCoeff()) + ")");
  }
  const auto& lambda = eig.eigenvalues();
  CVector phase(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) phase(k) = std::polar(1.0, -lambda(k) * t);
  const CMatrix& u = eig.eigenvectors();
  CMatrix a = u * phase.asDiagonal() * u.adjoint();
  return TransferMatrix(std::move(a), t, Provenance::Oracle);
}

/// y_m = sum_n row[(n-m) mod N] x_n in O(N log N).
inline CVector circulant_apply(std::span<const Complex> first_row, std::span<const Complex> x) {
  if (first_row.size() != x.size()) {
    throw ValidationError("circulant_apply: row length " + std::to_string(first_row.size()) +
                          " differs from vector length " + std::to_string(x.size()));
  }
  const std::size_t n = x.size();
  if (n == 0) return CVector();
  if (n == 1) {
    CVector y(1);
    y(0) = first_row[0] * x[0];
    return y;
  }
  std::vector<Complex> reversed(n);
  for (std::size_t j = 0; j < n; ++j) reversed[j] = first_row[(n - j) % n];
  std::vector<Complex> xv(x.begin(), x.end());
  std::vector<Complex> fr, fx, y;
  Eigen::FFT<double> fft;
  fft.fwd(fr, reversed);
  fft.fwd(fx, xv);
  for (std::size_t k = 0; k < n; ++k) fr[k] *= fx[k];
  fft.inv(y, fr);
  return Eigen::Map<CVector>(y.data(), static_cast<Eigen::Index>(n));
}

enum class Method { Auto, Open, ClosedTrig, ClosedBessel, Oracle };

inline TransferMatrix propagate(const LatticeSpec& spec, double t, Method method = Method::Auto,
                                const BesselSeriesConfig& cfg = {}) {
  switch (method) {
    case Method::Open: return open_transfer(spec, t);
    case Method::ClosedTrig: return closed_transfer_trig(spec, t);
    case Method::ClosedBessel: return closed_transfer_bessel(spec, t, cfg);
    case Method::Oracle: return exp_oracle(build_coupling_matrix(spec), t);
    case Method::Auto: break;
  }
  spec.validate();
  if (spec.topology == Topology::Open) return open_transfer(spec, t);
  bool zero = true;
  for (double d : spec.phases) zero = zero && d == 0.0;
  if (zero) return closed_transfer_trig(spec, t);
  if (spec.uniform_phase()) return closed_transfer_bessel(spec, t, cfg);
  return exp_oracle(build_coupling_matrix(spec), t);
}

}  // namespace tbprop
