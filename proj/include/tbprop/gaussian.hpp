#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "tbprop/parallel.hpp"
#include "tbprop/propagator.hpp"

namespace tbprop {

/// J = [[0, I], [-I, 0]] in the (q_1..q_N, p_1..p_N) ordering.
inline RMatrix symplectic_form(std::size_t n_modes) {
  const auto n = static_cast<Eigen::Index>(n_modes);
  RMatrix j = RMatrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = RMatrix::Identity(n, n);
  j.bottomLeftCorner(n, n) = -RMatrix::Identity(n, n);
  return j;
}

struct SqueezeProfile;

/// Second moments V_ij = <{R_i, R_j}>/2 of the quadratures R = (q, p); vacuum is I.
class CovarianceMatrix {
 public:
  static CovarianceMatrix vacuum(std::size_t n_modes) {
    const auto d = static_cast<Eigen::Index>(2 * n_modes);
    return CovarianceMatrix(RMatrix::Identity(d, d));
  }

  /// Checks symmetry, positive definiteness and V + iJ >= 0.
  static CovarianceMatrix from_entries(RMatrix v, double tol = 1e-9) {
    detail::require(v.rows() == v.cols() && v.rows() > 0 && v.rows() % 2 == 0,
                    "covariance matrix must be square with even dimension");
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if ((v - v.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
      throw ValidationError("covariance matrix is not symmetric");
    }
    RMatrix sym = 0.5 * (v + v.transpose());
    Eigen::LLT<RMatrix> llt(sym);
    if (llt.info() != Eigen::Success) throw ValidationError("covariance matrix is not positive definite");
    const std::size_t n = static_cast<std::size_t>(v.rows() / 2);
    CMatrix h = sym.cast<Complex>() + kI * symplectic_form(n).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(h, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol * scale) {
      throw ValidationError("covariance matrix violates the uncertainty relation V + iJ >= 0");
    }
    return CovarianceMatrix(std::move(sym));
  }

  /// Accepts the interleaved ordering (q_1, p_1, q_2, p_2, ...).
  static CovarianceMatrix from_interleaved(const RMatrix& v, double tol = 1e-9) {
    return from_entries(permute(v, false), tol);
  }

  RMatrix to_interleaved() const { return permute(v_, true); }

  const RMatrix& entries() const { return v_; }
  std::size_t n_modes() const { return static_cast<std::size_t>(v_.rows() / 2); }

  Eigen::Matrix2d mode_block(Mode j) const {
    check_mode(j, n_modes());
    const auto q = static_cast<Eigen::Index>(j.offset());
    const auto p = q + static_cast<Eigen::Index>(n_modes());
    Eigen::Matrix2d b;
    b << v_(q, q), v_(q, p), v_(p, q), v_(p, p);
    return b;
  }

  double mean_photon_number(Mode j) const {
    const auto b = mode_block(j);
    return (b(0, 0) + b(1, 1) - 2.0) / 4.0;
  }

  /// Symplectic eigenvalues (moduli of the eigenvalues of iJV), ascending, one per mode.
  std::vector<double> symplectic_eigenvalues() const {
    const std::size_t n = n_modes();
    CMatrix m = kI * (symplectic_form(n) * v_).cast<Complex>();
    Eigen::ComplexEigenSolver<CMatrix> eig(m, false);
    std::vector<double> all;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) all.push_back(std::abs(eig.eigenvalues()(k)));
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(0.5 * (all[2 * k] + all[2 * k + 1]));
    return out;
  }

 private:
  explicit CovarianceMatrix(RMatrix v) : v_(std::move(v)) {}
  friend CovarianceMatrix evolve_covariance(const CovarianceMatrix&, const TransferMatrix&);
  friend CovarianceMatrix initial_covariance(const SqueezeProfile&);

  static RMatrix permute(const RMatrix& v, bool to_interleaved) {
    const Eigen::Index n = v.rows() / 2;
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(2 * n);
    // perm maps block index -> interleaved index.
    for (Eigen::Index k = 0; k < n; ++k) {
      perm.indices()(k) = static_cast<int>(2 * k);
      perm.indices()(n + k) = static_cast<int>(2 * k + 1);
    }
    if (to_interleaved) return perm * v * perm.transpose();
    return perm.transpose() * v * perm;
  }

  RMatrix v_;
};

/// Squeezing parameters xi_j of the product of single-mode squeezed vacua.
struct SqueezeProfile {
  std::vector<Complex> xi;

  static SqueezeProfile real(const std::vector<double>& values) {
    SqueezeProfile p;
    for (double v : values) p.xi.emplace_back(v, 0.0);
    return p;
  }

  std::size_t size() const { return xi.size(); }

  bool is_real(double tol = 0.0) const {
    return std::all_of(xi.begin(), xi.end(), [tol](Complex z) { return std::abs(z.imag()) <= tol; });
  }

  bool is_symmetric(double tol = 1e-12) const {
    for (std::size_t j = 0; j < xi.size(); ++j) {
      if (std::abs(xi[j] - xi[xi.size() - 1 - j]) > tol) return false;
    }
    return true;
  }

  std::vector<double> real_parts() const {
    std::vector<double> out;
    for (Complex z : xi) out.push_back(z.real());
    return out;
  }
};

/// O = [[Re A, -Im A], [Im A, Re A]], from q' + i p' = A (q + i p).
inline RMatrix symplectic_from_unitary(const TransferMatrix& a) {
  if (a.unitarity_residual() > 1e-8) {
    throw ValidationError("transfer matrix is not unitary (residual " +
                          std::to_string(a.unitarity_residual()) + ")");
  }
  const auto n = static_cast<Eigen::Index>(a.size());
  RMatrix o(2 * n, 2 * n);
  const RMatrix re = a.entries().real(), im = a.entries().imag();
  o.topLeftCorner(n, n) = re;
  o.topRightCorner(n, n) = -im;
  o.bottomLeftCorner(n, n) = im;
  o.bottomRightCorner(n, n) = re;
  return o;
}

inline CovarianceMatrix initial_covariance(const SqueezeProfile& profile) {
  detail::require(profile.size() >= 1, "squeeze profile is empty");
  for (Complex z : profile.xi) {
    detail::require(std::isfinite(z.real()) && std::isfinite(z.imag()), "squeezing parameters must be finite");
    if (z.imag() != 0.0) {
      throw UnsupportedError("complex squeezing parameters are not supported by the covariance path");
    }
  }
  const auto n = static_cast<Eigen::Index>(profile.size());
  RMatrix v = RMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v(j, j) = std::exp(-2.0 * profile.xi[static_cast<std::size_t>(j)].real());
    v(n + j, n + j) = std::exp(2.0 * profile.xi[static_cast<std::size_t>(j)].real());
  }
  return CovarianceMatrix(std::move(v));
}

inline CovarianceMatrix evolve_covariance(const CovarianceMatrix& v, const TransferMatrix& a) {
  if (v.n_modes() != a.size()) {
    throw ValidationError("covariance has " + std::to_string(v.n_modes()) + " modes, transfer matrix " +
                          std::to_string(a.size()));
  }
  const RMatrix o = symplectic_from_unitary(a);
  RMatrix out = o * v.entries() * o.transpose();
  out = 0.5 * (out + out.transpose()).eval();
  return CovarianceMatrix(std::move(out));
}

/// Smallest variance over quadrature angles of mode j; below 1 means squeezed.
inline double single_mode_squeezing(const CovarianceMatrix& v, Mode j) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(v.mode_block(j), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

namespace detail {

/// Smallest eigenvalue of the covariance of the joint mode (a_i + e^{i phi} a_j)/sqrt(2).
inline double joint_mode_min_variance(const CovarianceMatrix& v, Mode i, Mode j, double phi) {
  const auto n = static_cast<Eigen::Index>(v.n_modes());
  const Eigen::Index qi = static_cast<Eigen::Index>(i.offset()), qj = static_cast<Eigen::Index>(j.offset());
  RMatrix w = RMatrix::Zero(2, 2 * n);
  const double s = 1.0 / std::sqrt(2.0), c = std::cos(phi), sn = std::sin(phi);
  w(0, qi) = s;
  w(0, qj) = s * c;
  w(0, n + qj) = -s * sn;
  w(1, n + qi) = s;
  w(1, qj) = s * sn;
  w(1, n + qj) = s * c;
  Eigen::Matrix2d sub = w * v.entries() * w.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sub, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

}  // namespace detail

/// Smallest variance of the joint quadratures of (a_i + e^{i phi} a_j)/sqrt(2), minimised over phi.
inline double two_mode_squeezing(const CovarianceMatrix& v, Mode i, Mode j) {
  check_mode(i, v.n_modes());
  check_mode(j, v.n_modes());
  detail::require(i != j, "two_mode_squeezing needs distinct modes");
  constexpr int kGrid = 72;
  const double step = 2.0 * kPi / kGrid;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGrid; ++k) {
    const double val = detail::joint_mode_min_variance(v, i, j, k * step);
    if (val < best_val) {
      best_val = val;
      best = k;
    }
  }
  auto f = [&](double phi) { return detail::joint_mode_min_variance(v, i, j, phi); };
  const auto r = boost::math::tools::brent_find_minima(f, (best - 1) * step, (best + 1) * step, 50);
  return std::min(best_val, r.second);
}

/// r_j = sum_i conj(xi_i) A_ij^2; zero for every j means no single-mode squeezing survives.
inline CVector cancellation_residual(const SqueezeProfile& profile, const TransferMatrix& a) {
  detail::require(profile.size() == a.size(), "profile and transfer matrix sizes differ");
  const auto n = static_cast<Eigen::Index>(a.size());
  CVector r = CVector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex aij = a.entries()(i, j);
      r(j) += std::conj(profile.xi[static_cast<std::size_t>(i)]) * aij * aij;
    }
  }
  return r;
}

/// Two-mode generators c_kj = sum_i conj(xi_i) A_ik A_ij for k < j (zero elsewhere).
inline CMatrix evolved_two_mode_coeffs(const SqueezeProfile& profile, const TransferMatrix& a) {
  detail::require(profile.size() == a.size(), "profile and transfer matrix sizes differ");
  const auto n = static_cast<Eigen::Index>(a.size());
  CMatrix c = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = k + 1; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        c(k, j) += std::conj(profile.xi[static_cast<std::size_t>(i)]) * a.entries()(i, k) * a.entries()(i, j);
      }
    }
  }
  return c;
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct Anchor {
  Mode mode{1};
  double value = 0.1;
};

struct CancellationOptions {
  std::size_t grid_points = 2001;
  double residual_tolerance = 1e-8;
  /// Relative smallest-singular-value threshold for the complex (stacked) system.
  double singular_tolerance = 1e-9;
};

struct CancellationResult {
  bool found = false;
  SqueezeProfile profile;
  double t_star = std::numeric_limits<double>::quiet_NaN();
  /// Every accepted root in the range, ascending; t_star is the first.
  std::vector<double> roots;
  /// (t, sigma_min / sigma_max) of the reduced system on the scan grid.
  std::vector<std::pair<double, double>> residual_curve;
  double residual_max = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Symmetric reduction: M_{j,u} = A_{u,j}^2 + A_{N+1-u,j}^2 (u != N+1-u), j,u = 1..ceil(N/2).
inline CMatrix reduced_cancellation_matrix(const TransferMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  const Eigen::Index h = (n + 1) / 2;
  CMatrix m(h, h);
  for (Eigen::Index j = 0; j < h; ++j) {
    for (Eigen::Index u = 0; u < h; ++u) {
      const Eigen::Index mirror = n - 1 - u;
      Complex v = a.entries()(u, j) * a.entries()(u, j);
      if (mirror != u) v += a.entries()(mirror, j) * a.entries()(mirror, j);
      m(j, u) = v;
    }
  }
  return m;
}

inline RMatrix stacked(const CMatrix& m) {
  RMatrix s(2 * m.rows(), m.cols());
  s.topRows(m.rows()) = m.real();
  s.bottomRows(m.rows()) = m.imag();
  return s;
}

inline double relative_sigma_min(const CMatrix& m) {
  Eigen::JacobiSVD<RMatrix> svd(stacked(m));
  const auto& s = svd.singularValues();
  return s(s.size() - 1) / std::max(s(0), 1e-300);
}

}  // namespace detail

/// Finds times where a real, mirror-symmetric squeeze profile leaves no single-mode squeezing.
///
/// At fixed t the condition is linear in xi, so the scan looks for t where the
/// reduced matrix is singular: sign changes of its determinant when it is real
/// (zero phases), or minima of its smallest singular value otherwise.
inline CancellationResult solve_cancellation(const LatticeSpec& spec, Interval t_range, Anchor anchor,
                                             const CancellationOptions& opts = {}) {
  spec.validate();
  if (spec.topology != Topology::Open) throw UnsupportedError("solve_cancellation requires an open chain");
  check_mode(anchor.mode, spec.n_modes, "anchor");
  detail::require(t_range.hi > t_range.lo, "t range must be nonempty");
  detail::require(opts.grid_points >= 3, "grid needs at least 3 points");
  detail::require(anchor.value != 0.0, "anchor value must be nonzero");

  const std::size_t n = spec.n_modes;
  const std::size_t h = (n + 1) / 2;
  const std::size_t anchor_u = std::min(anchor.mode.offset(), n - 1 - anchor.mode.offset());

  const std::size_t g = opts.grid_points;
  std::vector<double> ts(g), det(g), sig(g), imag_scale(g);
  parallel_for(g, [&](std::size_t k) {
    const double t = t_range.lo + (t_range.hi - t_range.lo) * static_cast<double>(k) / static_cast<double>(g - 1);
    ts[k] = t;
    CMatrix m = detail::reduced_cancellation_matrix(open_transfer(spec, t));
    det[k] = m.real().determinant();
    imag_scale[k] = m.imag().cwiseAbs().maxCoeff() / std::max(1e-300, m.cwiseAbs().maxCoeff());
    sig[k] = detail::relative_sigma_min(m);
  });

  CancellationResult result;
  for (std::size_t k = 0; k < g; ++k) result.residual_curve.emplace_back(ts[k], sig[k]);
  const bool real_system = *std::max_element(imag_scale.begin(), imag_scale.end()) <= 1e-12;

  auto reduced_at = [&](double t) { return detail::reduced_cancellation_matrix(open_transfer(spec, t)); };

  std::vector<double> candidates;
  if (real_system) {
    auto f = [&](double t) { return reduced_at(t).real().determinant(); };
    for (std::size_t k = 0; k + 1 < g; ++k) {
      if (det[k] == 0.0) {
        candidates.push_back(ts[k]);
      } else if (det[k] * det[k + 1] < 0.0) {
        std::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(52);
        auto r = boost::math::tools::toms748_solve(f, ts[k], ts[k + 1], det[k], det[k + 1], tol, iters);
        candidates.push_back(0.5 * (r.first + r.second));
      }
    }
    if (det[g - 1] == 0.0) candidates.push_back(ts[g - 1]);
  } else {
    auto f = [&](double t) { return detail::relative_sigma_min(reduced_at(t)); };
    for (std::size_t k = 1; k + 1 < g; ++k) {
      if (sig[k] <= sig[k - 1] && sig[k] <= sig[k + 1]) {
        auto r = boost::math::tools::brent_find_minima(f, ts[k - 1], ts[k + 1], 52);
        if (r.second <= opts.singular_tolerance) candidates.push_back(r.first);
      }
    }
  }

  for (double t : candidates) {
    const TransferMatrix a = open_transfer(spec, t);
    CMatrix m = detail::reduced_cancellation_matrix(a);
    Eigen::VectorXd v;
    if (real_system) {
      Eigen::JacobiSVD<RMatrix> svd(m.real(), Eigen::ComputeFullV);
      v = svd.matrixV().col(static_cast<Eigen::Index>(h - 1));
    } else {
      Eigen::JacobiSVD<RMatrix> svd(detail::stacked(m), Eigen::ComputeFullV);
      v = svd.matrixV().col(static_cast<Eigen::Index>(h - 1));
    }
    const double pivot = v(static_cast<Eigen::Index>(anchor_u));
    if (std::abs(pivot) < 1e-12 * v.cwiseAbs().maxCoeff()) continue;
    std::vector<double> xi(n);
    for (std::size_t u = 0; u < h; ++u) {
      const double val = anchor.value * v(static_cast<Eigen::Index>(u)) / pivot;
      xi[u] = val;
      xi[n - 1 - u] = val;
    }
    SqueezeProfile profile = SqueezeProfile::real(xi);
    const double res = cancellation_residual(profile, a).cwiseAbs().maxCoeff();
    if (res > opts.residual_tolerance) continue;
    result.roots.push_back(t);
    if (!result.found) {
      result.found = true;
      result.profile = profile;
      result.t_star = t;
      result.residual_max = res;
    }
  }
  return result;
}

}  // namespace tbprop
