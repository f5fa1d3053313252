#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "tbprop/gaussian.hpp"
#include "tbprop/parallel.hpp"

namespace tbprop {

enum class ExcitationSign { Added, Subtracted };

inline const char* to_string(ExcitationSign s) { return s == ExcitationSign::Added ? "added" : "subtracted"; }

/// Unit vector g in the (q, p) basis describing the mode a^dagger(g) = sum_l (g_q,l + i g_p,l) a_l^dagger.
class ExcitationVector {
 public:
  ExcitationVector(RVector g, ExcitationSign sign) : g_(std::move(g)), sign_(sign) {
    detail::require(g_.size() > 0 && g_.size() % 2 == 0, "excitation vector must have even length");
    detail::require(g_.allFinite(), "excitation vector must be finite");
    const double norm = g_.norm();
    detail::require(norm > 0.0, "excitation vector must be nonzero");
    g_ /= norm;
  }

  /// From mode weights c_l; the vector is normalised.
  static ExcitationVector from_coefficients(const CVector& c, ExcitationSign sign) {
    const auto n = c.size();
    RVector g(2 * n);
    g.head(n) = c.real();
    g.tail(n) = c.imag();
    return ExcitationVector(std::move(g), sign);
  }

  static ExcitationVector single_mode(Mode l, std::size_t n_modes, ExcitationSign sign) {
    check_mode(l, n_modes);
    CVector c = CVector::Zero(static_cast<Eigen::Index>(n_modes));
    c(static_cast<Eigen::Index>(l.offset())) = 1.0;
    return from_coefficients(c, sign);
  }

  /// Equal weight on every mode; phases[l] is the optional phase of mode l + 1.
  static ExcitationVector uniform(std::size_t n_modes, ExcitationSign sign, const std::vector<double>& phases = {}) {
    detail::require(phases.empty() || phases.size() == n_modes, "uniform excitation needs one phase per mode");
    CVector c(static_cast<Eigen::Index>(n_modes));
    for (std::size_t l = 0; l < n_modes; ++l) c(static_cast<Eigen::Index>(l)) = std::polar(1.0, phases.empty() ? 0.0 : phases[l]);
    return from_coefficients(c, sign);
  }

  const RVector& g() const { return g_; }
  ExcitationSign sign() const { return sign_; }
  std::size_t n_modes() const { return static_cast<std::size_t>(g_.size() / 2); }

  CVector coefficients() const {
    const auto n = static_cast<Eigen::Index>(n_modes());
    CVector c(n);
    for (Eigen::Index l = 0; l < n; ++l) c(l) = Complex(g_(l), g_(n + l));
    return c;
  }

 private:
  RVector g_;
  ExcitationSign sign_;
};

struct PhaseSpacePoint {
  RVector y;

  explicit PhaseSpacePoint(RVector v) : y(std::move(v)) {
    detail::require(y.allFinite(), "phase-space point must be finite");
  }
};

/// Index into (q_1..q_N, p_1..p_N), written as "q3" or "p3".
struct QuadratureAxis {
  bool momentum = false;
  Mode mode{1};

  static QuadratureAxis parse(const std::string& text) {
    if (text.size() < 2 || (text[0] != 'q' && text[0] != 'p')) {
      throw ValidationError("quadrature axis must look like q3 or p3, got '" + text + "'");
    }
    std::size_t pos = 0;
    long m = 0;
    try {
      m = std::stol(text.substr(1), &pos);
    } catch (const std::exception&) {
      throw ValidationError("quadrature axis must look like q3 or p3, got '" + text + "'");
    }
    if (pos + 1 != text.size() || m < 1) throw ValidationError("bad quadrature axis '" + text + "'");
    return {text[0] == 'p', Mode(static_cast<std::size_t>(m))};
  }

  std::size_t index(std::size_t n_modes) const {
    check_mode(mode, n_modes, "axis");
    return (momentum ? n_modes : 0) + mode.offset();
  }

  std::string label() const { return (momentum ? "p" : "q") + std::to_string(mode.number()); }
};

/// Excitation kernel A(+/-) in both frames together with the Gaussian core.
class AddSubKernel {
 public:
  const RMatrix& a_initial() const { return a_initial_; }
  const RMatrix& a_matrix() const { return a_evolved_; }
  const CovarianceMatrix& v_initial() const { return v_initial_; }
  const CovarianceMatrix& v_evolved() const { return v_evolved_; }
  const RVector& g_evolved() const { return g_evolved_; }
  ExcitationSign sign() const { return sign_; }
  /// tr(V'^-1 A').
  double trace_term() const { return trace_term_; }
  /// V'^-1 A' V'^-1, the quadratic form in Z.
  const RMatrix& quadratic_form() const { return quad_; }
  const RMatrix& precision() const { return precision_; }
  double log_det() const { return log_det_; }
  std::size_t n_modes() const { return v_evolved_.n_modes(); }

 private:
  friend AddSubKernel build_kernel(const CovarianceMatrix&, const ExcitationVector&, const TransferMatrix&);
  AddSubKernel(CovarianceMatrix v0, CovarianceMatrix v1) : v_initial_(std::move(v0)), v_evolved_(std::move(v1)) {}

  CovarianceMatrix v_initial_;
  CovarianceMatrix v_evolved_;
  RMatrix a_initial_;
  RMatrix a_evolved_;
  RVector g_evolved_;
  ExcitationSign sign_ = ExcitationSign::Added;
  double trace_term_ = 0.0;
  RMatrix quad_;
  RMatrix precision_;
  double log_det_ = 0.0;
};

/// A(+/-) = 2 (V +/- 1)(P_g + P_Jg)(V +/- 1) / tr[(V +/- 1)(P_g + P_Jg)], then carried to the evolved frame.
inline AddSubKernel build_kernel(const CovarianceMatrix& v, const ExcitationVector& g, const TransferMatrix& a) {
  const std::size_t n = v.n_modes();
  detail::require(g.n_modes() == n, "excitation vector and covariance sizes differ");
  detail::require(a.size() == n, "transfer matrix and covariance sizes differ");
  const auto d = static_cast<Eigen::Index>(2 * n);
  const RMatrix j = symplectic_form(n);
  const RVector jg = j * g.g();
  const RMatrix proj = g.g() * g.g().transpose() + jg * jg.transpose();
  const double s = g.sign() == ExcitationSign::Added ? 1.0 : -1.0;
  const RMatrix shifted = v.entries() + s * RMatrix::Identity(d, d);
  const double tr = (shifted * proj).trace();
  if (tr <= 1e-12) {
    throw UndefinedStateError("photon subtraction from a mode with no excitations is undefined");
  }
  const RMatrix o = symplectic_from_unitary(a);
  AddSubKernel k(v, evolve_covariance(v, a));
  k.sign_ = g.sign();
  k.a_initial_ = 2.0 * shifted * proj * shifted / tr;
  k.a_evolved_ = o * k.a_initial_ * o.transpose();
  k.g_evolved_ = o * g.g();

  Eigen::LLT<RMatrix> llt(k.v_evolved_.entries());
  if (llt.info() != Eigen::Success) throw NumericError("evolved covariance is not positive definite");
  k.precision_ = llt.solve(RMatrix::Identity(d, d));
  k.log_det_ = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  k.quad_ = k.precision_ * k.a_evolved_ * k.precision_;
  k.quad_ = 0.5 * (k.quad_ + k.quad_.transpose()).eval();
  k.trace_term_ = (k.precision_ * k.a_evolved_).trace();
  return k;
}

/// (2 pi)^-N det(V')^-1/2 exp(-y^T V'^-1 y / 2).
inline double gaussian_wigner(const PhaseSpacePoint& y, const CovarianceMatrix& v) {
  detail::require(static_cast<std::size_t>(y.y.size()) == 2 * v.n_modes(), "phase-space point has wrong dimension");
  Eigen::LLT<RMatrix> llt(v.entries());
  if (llt.info() != Eigen::Success) throw NumericError("covariance is singular");
  const RVector z = llt.matrixL().solve(y.y);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double n = static_cast<double>(v.n_modes());
  return std::exp(-0.5 * z.squaredNorm() - 0.5 * log_det - n * std::log(2.0 * kPi));
}

/// W(+/-) = Z(y) W_G(y) with Z = (y^T V'^-1 A' V'^-1 y - tr(V'^-1 A') + 2) / 2.
inline double wigner_pm(const PhaseSpacePoint& y, const AddSubKernel& k) {
  detail::require(static_cast<std::size_t>(y.y.size()) == 2 * k.n_modes(), "phase-space point has wrong dimension");
  const double quad = y.y.dot(k.quadratic_form() * y.y);
  const double z = 0.5 * (quad - k.trace_term() + 2.0);
  const double expo = -0.5 * y.y.dot(k.precision() * y.y);
  const double n = static_cast<double>(k.n_modes());
  return z * std::exp(expo - 0.5 * k.log_det() - n * std::log(2.0 * kPi));
}

struct GridAxisSpec {
  double lo = -5.0;
  double hi = 5.0;
  std::size_t points = 201;

  double value(std::size_t i) const {
    return points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
};

/// values(i, j) is the density at (axis_a = a_values[i], axis_b = b_values[j]).
struct WignerGrid {
  QuadratureAxis axis_a;
  QuadratureAxis axis_b;
  std::vector<double> a_values;
  std::vector<double> b_values;
  RMatrix values;
};

/// Closed-form 2-D marginal: the Gaussian marginal of the chosen pair times the
/// conditional expectation of Z, which needs only the conditional mean and covariance.
inline WignerGrid marginal_2d(const AddSubKernel& k, QuadratureAxis axis_a, QuadratureAxis axis_b,
                              GridAxisSpec grid_a = {}, GridAxisSpec grid_b = {}, bool include_excitation = true) {
  const std::size_t n = k.n_modes();
  const std::size_t ia = axis_a.index(n), ib = axis_b.index(n);
  detail::require(ia != ib, "marginal axes must differ");
  detail::require(grid_a.points >= 1 && grid_b.points >= 1, "grid needs at least one point per axis");
  const auto d = static_cast<Eigen::Index>(2 * n);

  // Reorder so the kept pair comes first.
  std::vector<Eigen::Index> order{static_cast<Eigen::Index>(ia), static_cast<Eigen::Index>(ib)};
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i != order[0] && i != order[1]) order.push_back(i);
  }
  RMatrix v(d, d), kq(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      v(r, c) = k.v_evolved().entries()(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(c)]);
      kq(r, c) = k.quadratic_form()(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(c)]);
    }
  }
  const Eigen::Index rest = d - 2;
  const Eigen::Matrix2d vxx = v.topLeftCorner(2, 2);
  const Eigen::Matrix2d vxx_inv = vxx.inverse();
  RMatrix gain = RMatrix::Zero(rest, 2);
  double cond_trace = 0.0;
  if (rest > 0) {
    gain = v.bottomLeftCorner(rest, 2) * vxx_inv;
    const RMatrix cond = v.bottomRightCorner(rest, rest) - gain * v.topRightCorner(2, rest);
    cond_trace = (kq.bottomRightCorner(rest, rest) * cond).trace();
  }
  // z = T x with T = [I; gain], so E[y^T K y | x] = x^T T^T K T x + tr(K_rr S).
  RMatrix t(d, 2);
  t.topRows(2) = RMatrix::Identity(2, 2);
  if (rest > 0) t.bottomRows(rest) = gain;
  const Eigen::Matrix2d kx = t.transpose() * kq * t;
  const double norm = 1.0 / (2.0 * kPi * std::sqrt(vxx.determinant()));

  WignerGrid out{axis_a, axis_b, {}, {}, RMatrix(static_cast<Eigen::Index>(grid_a.points), static_cast<Eigen::Index>(grid_b.points))};
  for (std::size_t i = 0; i < grid_a.points; ++i) out.a_values.push_back(grid_a.value(i));
  for (std::size_t j = 0; j < grid_b.points; ++j) out.b_values.push_back(grid_b.value(j));
  parallel_for(grid_a.points, [&](std::size_t i) {
    for (std::size_t j = 0; j < grid_b.points; ++j) {
      const Eigen::Vector2d x(out.a_values[i], out.b_values[j]);
      const double gauss = norm * std::exp(-0.5 * x.dot(vxx_inv * x));
      double z = 1.0;
      if (include_excitation) z = 0.5 * (x.dot(kx * x) + cond_trace - k.trace_term() + 2.0);
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z * gauss;
    }
  });
  return out;
}

}  // namespace tbprop
