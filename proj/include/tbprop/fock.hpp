#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "tbprop/gaussian.hpp"
#include "tbprop/lattice.hpp"

namespace tbprop {

using SparseCMatrix = Eigen::SparseMatrix<Complex>;

/// Truncated Fock space with at most `cutoff` photons per mode; mode 1 is the most significant digit.
class FockBasis {
 public:
  FockBasis(std::size_t n_modes, std::size_t cutoff) : n_modes_(n_modes), cutoff_(cutoff) {
    detail::require(n_modes >= 1, "Fock basis needs at least one mode");
    std::size_t dim = 1;
    for (std::size_t j = 0; j < n_modes; ++j) {
      if (dim > std::numeric_limits<std::size_t>::max() / (cutoff + 1)) {
        throw ResourceError("Fock dimension overflows");
      }
      dim *= cutoff + 1;
    }
    dimension_ = dim;
  }

  std::size_t n_modes() const { return n_modes_; }
  std::size_t cutoff() const { return cutoff_; }
  std::size_t dimension() const { return dimension_; }

  std::size_t stride(Mode j) const {
    std::size_t s = 1;
    for (std::size_t k = j.number(); k < n_modes_; ++k) s *= cutoff_ + 1;
    return s;
  }

  std::size_t index(const std::vector<std::size_t>& occupation) const {
    detail::require(occupation.size() == n_modes_, "occupation list length must equal mode count");
    std::size_t idx = 0;
    for (std::size_t n : occupation) {
      if (n > cutoff_) throw ValidationError("occupation exceeds Fock cutoff");
      idx = idx * (cutoff_ + 1) + n;
    }
    return idx;
  }

  std::vector<std::size_t> occupation(std::size_t idx) const {
    std::vector<std::size_t> occ(n_modes_);
    for (std::size_t k = n_modes_; k-- > 0;) {
      occ[k] = idx % (cutoff_ + 1);
      idx /= cutoff_ + 1;
    }
    return occ;
  }

 private:
  std::size_t n_modes_;
  std::size_t cutoff_;
  std::size_t dimension_ = 1;
};

struct FockState {
  FockBasis basis;
  CVector amplitudes;
  /// Probability weight discarded by the cutoff when the state was prepared.
  double tail_norm = 0.0;
};

struct OccupationList {
  std::vector<std::size_t> counts;
};

/// Normalised sum of weighted occupation states.
struct FockSuperposition {
  std::vector<std::pair<Complex, std::vector<std::size_t>>> terms;
};

using FockInitial = std::variant<SqueezeProfile, OccupationList, FockSuperposition>;

struct FockOptions {
  std::size_t max_dimension = 4'000'000;
  double tolerance = 1e-14;
};

namespace detail {

/// Closed-form squeezed-vacuum amplitudes <n|S(xi)|0> for n = 0..cutoff.
inline CVector squeezed_vacuum_amplitudes(Complex xi, std::size_t cutoff, double& tail) {
  const double r = std::abs(xi);
  const Complex ratio = r == 0.0 ? Complex(0.0) : -(xi / r) * std::tanh(r);
  CVector s = CVector::Zero(static_cast<Eigen::Index>(cutoff + 1));
  Complex c = 1.0 / std::sqrt(std::cosh(r));
  double kept = 0.0;
  for (std::size_t k = 0; 2 * k <= cutoff; ++k) {
    s(static_cast<Eigen::Index>(2 * k)) = c;
    kept += std::norm(c);
    const double fk = static_cast<double>(k);
    c *= ratio * std::sqrt((2 * fk + 1) * (2 * fk + 2)) / (2 * (fk + 1));
  }
  tail = std::max(0.0, 1.0 - kept);
  return s;
}

inline void check_budget(const FockBasis& basis, const FockOptions& opts) {
  if (basis.dimension() > opts.max_dimension) {
    throw ResourceError("Fock dimension " + std::to_string(basis.dimension()) + " exceeds budget " +
                        std::to_string(opts.max_dimension));
  }
}

}  // namespace detail

inline FockState prepare_fock_state(const FockInitial& initial, const FockBasis& basis) {
  FockState st{basis, CVector::Zero(static_cast<Eigen::Index>(basis.dimension())), 0.0};
  if (const auto* prof = std::get_if<SqueezeProfile>(&initial)) {
    detail::require(prof->size() == basis.n_modes(), "squeeze profile length must equal mode count");
    std::vector<CVector> single;
    double kept = 1.0;
    for (Complex xi : prof->xi) {
      double tail = 0.0;
      single.push_back(detail::squeezed_vacuum_amplitudes(xi, basis.cutoff(), tail));
      kept *= 1.0 - tail;
    }
    for (std::size_t idx = 0; idx < basis.dimension(); ++idx) {
      auto occ = basis.occupation(idx);
      Complex v = 1.0;
      for (std::size_t j = 0; j < occ.size() && v != 0.0; ++j) v *= single[j](static_cast<Eigen::Index>(occ[j]));
      st.amplitudes(static_cast<Eigen::Index>(idx)) = v;
    }
    st.tail_norm = std::max(0.0, 1.0 - kept);
  } else if (const auto* occ = std::get_if<OccupationList>(&initial)) {
    st.amplitudes(static_cast<Eigen::Index>(basis.index(occ->counts))) = 1.0;
  } else {
    const auto& sup = std::get<FockSuperposition>(initial);
    detail::require(!sup.terms.empty(), "superposition has no terms");
    for (const auto& [w, occ] : sup.terms) st.amplitudes(static_cast<Eigen::Index>(basis.index(occ))) += w;
    const double norm = st.amplitudes.norm();
    detail::require(norm > 0.0, "superposition has zero norm");
    st.amplitudes /= norm;
  }
  return st;
}

/// H = sum_{j,k} C_jk a_j^dagger a_k restricted to the truncated basis.
inline SparseCMatrix fock_hamiltonian(const LatticeSpec& spec, const FockBasis& basis) {
  detail::require(spec.n_modes == basis.n_modes(), "lattice and basis mode counts differ");
  const CMatrix c = build_coupling_matrix(spec).entries();
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t j = 0; j < spec.n_modes; ++j) {
    for (std::size_t k = 0; k < spec.n_modes; ++k) {
      if (j != k && c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) != Complex(0)) links.emplace_back(j, k);
    }
  }
  std::vector<std::size_t> strides(spec.n_modes);
  for (std::size_t j = 0; j < spec.n_modes; ++j) strides[j] = basis.stride(Mode(j + 1));
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(basis.dimension() * links.size());
  for (std::size_t idx = 0; idx < basis.dimension(); ++idx) {
    const auto occ = basis.occupation(idx);
    for (auto [j, k] : links) {
      if (occ[k] == 0 || occ[j] == basis.cutoff()) continue;
      const std::size_t target = idx - strides[k] + strides[j];
      const double amp = std::sqrt(static_cast<double>(occ[k]) * static_cast<double>(occ[j] + 1));
      triplets.emplace_back(static_cast<int>(target), static_cast<int>(idx),
                            c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * amp);
    }
  }
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  SparseCMatrix h(dim, dim);
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.makeCompressed();
  return h;
}

/// exp(-i t H) v by a Taylor series on substeps with ||tau H||_1 <= 2.
inline CVector expm_multiply(const SparseCMatrix& h, const CVector& v, double t, double tol = 1e-14) {
  double norm = 0.0;
  for (Eigen::Index col = 0; col < h.outerSize(); ++col) {
    double s = 0.0;
    for (SparseCMatrix::InnerIterator it(h, col); it; ++it) s += std::abs(it.value());
    norm = std::max(norm, s);
  }
  if (norm == 0.0 || t == 0.0) return v;
  const auto steps = static_cast<std::size_t>(std::ceil(norm * std::abs(t) / 2.0));
  const double tau = t / static_cast<double>(steps);
  CVector w = v;
  CVector term(v.size()), sum(v.size());
  for (std::size_t s = 0; s < steps; ++s) {
    term = w;
    sum = w;
    for (int k = 1; k < 80; ++k) {
      term = (h * term) * Complex(0.0, -tau / k);
      sum += term;
      if (term.norm() <= tol * sum.norm()) break;
    }
    w = sum;
  }
  return w;
}

inline FockState fock_evolve_state(const LatticeSpec& spec, const FockState& state, double t) {
  FockState out = state;
  out.amplitudes = expm_multiply(fock_hamiltonian(spec, state.basis), state.amplitudes, t);
  return out;
}

/// Schrodinger evolution on the truncated Fock space.
inline FockState fock_evolve(const LatticeSpec& spec, const FockInitial& initial, std::size_t cutoff, double t,
                             const FockOptions& opts = {}) {
  spec.validate();
  FockBasis basis(spec.n_modes, cutoff);
  detail::check_budget(basis, opts);
  FockState st = prepare_fock_state(initial, basis);
  st.amplitudes = expm_multiply(fock_hamiltonian(spec, basis), st.amplitudes, t, opts.tolerance);
  return st;
}

namespace detail {

/// a_j psi (exact within the truncated space).
inline CVector annihilate(const FockState& st, Mode j) {
  const std::size_t stride = st.basis.stride(j);
  CVector out = CVector::Zero(st.amplitudes.size());
  for (std::size_t idx = 0; idx < st.basis.dimension(); ++idx) {
    const std::size_t n = (idx / stride) % (st.basis.cutoff() + 1);
    if (n == 0) continue;
    out(static_cast<Eigen::Index>(idx - stride)) +=
        std::sqrt(static_cast<double>(n)) * st.amplitudes(static_cast<Eigen::Index>(idx));
  }
  return out;
}

/// a_j^dagger psi, dropping weight pushed past the cutoff.
inline CVector create(const FockState& st, Mode j) {
  const std::size_t stride = st.basis.stride(j);
  CVector out = CVector::Zero(st.amplitudes.size());
  for (std::size_t idx = 0; idx < st.basis.dimension(); ++idx) {
    const std::size_t n = (idx / stride) % (st.basis.cutoff() + 1);
    if (n == st.basis.cutoff()) continue;
    out(static_cast<Eigen::Index>(idx + stride)) +=
        std::sqrt(static_cast<double>(n + 1)) * st.amplitudes(static_cast<Eigen::Index>(idx));
  }
  return out;
}

}  // namespace detail

/// Normalised sum_l c_l a_l^dagger psi.
inline FockState apply_creation(const FockState& st, const CVector& c) {
  detail::require(static_cast<std::size_t>(c.size()) == st.basis.n_modes(), "coefficient count must equal mode count");
  FockState out = st;
  out.amplitudes.setZero();
  for (std::size_t l = 0; l < st.basis.n_modes(); ++l) {
    if (c(static_cast<Eigen::Index>(l)) != Complex(0)) {
      out.amplitudes += c(static_cast<Eigen::Index>(l)) * detail::create(st, Mode(l + 1));
    }
  }
  const double norm = out.amplitudes.norm();
  if (norm == 0.0) throw UndefinedStateError("creation operator annihilated the state");
  out.amplitudes /= norm;
  return out;
}

/// Normalised sum_l conj(c_l) a_l psi, the adjoint of apply_creation's operator.
inline FockState apply_annihilation(const FockState& st, const CVector& c) {
  detail::require(static_cast<std::size_t>(c.size()) == st.basis.n_modes(), "coefficient count must equal mode count");
  FockState out = st;
  out.amplitudes.setZero();
  for (std::size_t l = 0; l < st.basis.n_modes(); ++l) {
    if (c(static_cast<Eigen::Index>(l)) != Complex(0)) {
      out.amplitudes += std::conj(c(static_cast<Eigen::Index>(l))) * detail::annihilate(st, Mode(l + 1));
    }
  }
  const double norm = out.amplitudes.norm();
  if (norm == 0.0) throw UndefinedStateError("annihilation operator annihilated the state");
  out.amplitudes /= norm;
  return out;
}

inline std::vector<double> fock_mean_photon_numbers(const FockState& st) {
  std::vector<double> out(st.basis.n_modes(), 0.0);
  for (std::size_t idx = 0; idx < st.basis.dimension(); ++idx) {
    const double p = std::norm(st.amplitudes(static_cast<Eigen::Index>(idx)));
    if (p == 0.0) continue;
    const auto occ = st.basis.occupation(idx);
    for (std::size_t j = 0; j < occ.size(); ++j) out[j] += p * static_cast<double>(occ[j]);
  }
  return out;
}

/// Smallest quadrature variance of mode j: 1 + 2(<n> - |<a>|^2) - 2|<a^2> - <a>^2|.
inline double fock_single_mode_squeezing(const FockState& st, Mode j) {
  check_mode(j, st.basis.n_modes());
  FockState lowered = st;
  lowered.amplitudes = detail::annihilate(st, j);
  const Complex mean = st.amplitudes.dot(lowered.amplitudes);
  const Complex second = st.amplitudes.dot(detail::annihilate(lowered, j));
  const double n = lowered.amplitudes.squaredNorm();
  return 1.0 + 2.0 * (n - std::norm(mean)) - 2.0 * std::abs(second - mean * mean);
}

/// Quadrature covariance in the (q, p) block ordering, vacuum = I.
inline RMatrix fock_covariance(const FockState& st) {
  const std::size_t n = st.basis.n_modes();
  const auto nn = static_cast<Eigen::Index>(n);
  std::vector<CVector> lowered, raised;
  for (std::size_t j = 0; j < n; ++j) {
    lowered.push_back(detail::annihilate(st, Mode(j + 1)));
    raised.push_back(detail::create(st, Mode(j + 1)));
  }
  // b = (a_1..a_N, a_1^dagger..a_N^dagger); G = <{b_k, b_l}>/2 - <b_k><b_l>.
  CVector mean(2 * nn);
  for (Eigen::Index j = 0; j < nn; ++j) {
    mean(j) = st.amplitudes.dot(lowered[static_cast<std::size_t>(j)]);
    mean(nn + j) = std::conj(mean(j));
  }
  CMatrix g(2 * nn, 2 * nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      const Complex aa = raised[static_cast<std::size_t>(i)].dot(lowered[static_cast<std::size_t>(j)]);
      const Complex ada = lowered[static_cast<std::size_t>(i)].dot(lowered[static_cast<std::size_t>(j)]);
      const double delta = i == j ? 0.5 : 0.0;
      g(i, j) = aa;
      g(nn + i, nn + j) = std::conj(aa);
      g(nn + i, j) = ada + delta;
      g(i, nn + j) = std::conj(ada) + delta;
    }
  }
  g -= mean * mean.transpose();
  CMatrix t = CMatrix::Zero(2 * nn, 2 * nn);
  t.topLeftCorner(nn, nn) = CMatrix::Identity(nn, nn);
  t.topRightCorner(nn, nn) = CMatrix::Identity(nn, nn);
  t.bottomLeftCorner(nn, nn) = -kI * CMatrix::Identity(nn, nn);
  t.bottomRightCorner(nn, nn) = kI * CMatrix::Identity(nn, nn);
  return (t * g * t.transpose()).real();
}

/// Gamma_mn = <a_m^dagger a_n^dagger a_n a_m> = ||a_n a_m psi||^2.
inline RMatrix fock_gamma(const FockState& st) {
  const std::size_t n = st.basis.n_modes();
  RMatrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t m = 0; m < n; ++m) {
    FockState once = st;
    once.amplitudes = detail::annihilate(st, Mode(m + 1));
    for (std::size_t k = 0; k < n; ++k) {
      g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = detail::annihilate(once, Mode(k + 1)).squaredNorm();
    }
  }
  return g;
}

namespace detail {

/// Columns <m|D(beta)|n>, m = 0..rows-1, n = 0..cols-1.
inline CMatrix displacement_columns(Complex beta, std::size_t rows, std::size_t cols) {
  const auto r = static_cast<Eigen::Index>(rows);
  CMatrix d = CMatrix::Zero(r, static_cast<Eigen::Index>(cols));
  Complex c = std::exp(-0.5 * std::norm(beta));
  for (Eigen::Index m = 0; m < r; ++m) {
    d(m, 0) = c;
    c *= beta / std::sqrt(static_cast<double>(m + 1));
  }
  for (Eigen::Index n = 1; n < static_cast<Eigen::Index>(cols); ++n) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index m = 0; m < r; ++m) {
      Complex v = -std::conj(beta) * d(m, n - 1);
      if (m > 0) v += std::sqrt(static_cast<double>(m)) * d(m - 1, n - 1);
      d(m, n) = v * inv;
    }
  }
  return d;
}

}  // namespace detail

/// W(y) = (2 pi)^-N <phi|(-1)^n|phi>, phi = D(-alpha) psi, alpha_j = (q_j + i p_j)/2.
inline double fock_wigner(const FockState& st, const RVector& y) {
  const std::size_t n = st.basis.n_modes();
  detail::require(static_cast<std::size_t>(y.size()) == 2 * n, "phase-space point has wrong dimension");
  const std::size_t c = st.basis.cutoff() + 1;
  const std::size_t ext = c + 60;
  // Tensor with per-mode extents; mode 1 most significant.
  std::vector<std::size_t> dims(n, c);
  std::vector<Complex> cur(st.amplitudes.data(), st.amplitudes.data() + st.amplitudes.size());
  for (std::size_t j = 0; j < n; ++j) {
    const Complex alpha(0.5 * y(static_cast<Eigen::Index>(j)), 0.5 * y(static_cast<Eigen::Index>(n + j)));
    const CMatrix d = detail::displacement_columns(-alpha, ext, c);
    std::size_t outer = 1, inner = 1;
    for (std::size_t k = 0; k < j; ++k) outer *= dims[k];
    for (std::size_t k = j + 1; k < n; ++k) inner *= dims[k];
    std::vector<Complex> next(outer * ext * inner, Complex(0));
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t a = 0; a < c; ++a) {
        for (std::size_t i = 0; i < inner; ++i) {
          const Complex v = cur[(o * c + a) * inner + i];
          if (v == Complex(0)) continue;
          for (std::size_t m = 0; m < ext; ++m) {
            next[(o * ext + m) * inner + i] += d(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(a)) * v;
          }
        }
      }
    }
    dims[j] = ext;
    cur = std::move(next);
  }
  double parity_sum = 0.0;
  for (std::size_t idx = 0; idx < cur.size(); ++idx) {
    std::size_t rest = idx, total = 0;
    for (std::size_t k = n; k-- > 0;) {
      total += rest % dims[k];
      rest /= dims[k];
    }
    parity_sum += (total % 2 == 0 ? 1.0 : -1.0) * std::norm(cur[idx]);
  }
  return parity_sum / std::pow(2.0 * kPi, static_cast<double>(n));
}

/// Basis {|1_m 1_n>, m < n} followed by {|2_m>}.
class TwoExcitationBasis {
 public:
  explicit TwoExcitationBasis(std::size_t n_modes) : n_(n_modes) {
    detail::require(n_modes >= 1, "two-excitation basis needs at least one mode");
    for (std::size_t m = 0; m < n_; ++m) {
      for (std::size_t k = m + 1; k < n_; ++k) states_.emplace_back(m, k);
    }
    for (std::size_t m = 0; m < n_; ++m) states_.emplace_back(m, m);
  }

  std::size_t n_modes() const { return n_; }
  std::size_t dimension() const { return states_.size(); }
  /// 0-based mode pair of basis state s; equal entries mean a doubly occupied mode.
  std::pair<std::size_t, std::size_t> state(std::size_t s) const { return states_.at(s); }

  std::size_t index(Mode a, Mode b) const {
    std::size_t m = std::min(a.offset(), b.offset()), k = std::max(a.offset(), b.offset());
    if (m == k) return n_ * (n_ - 1) / 2 + m;
    return m * n_ - m * (m + 1) / 2 + (k - m - 1);
  }

 private:
  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> states_;
};

struct TwoPhotonInitial {
  enum class Kind { Product, Superposition };
  Kind kind = Kind::Product;
  Mode k{1};
  Mode l{2};
  /// Relative phase of |2_l> in the superposition (|2_k> + e^{i phase}|2_l>)/sqrt(2).
  double phase = 0.0;

  static TwoPhotonInitial product(Mode a, Mode b) { return {Kind::Product, a, b, 0.0}; }
  static TwoPhotonInitial superposition(Mode a, Mode b, double phase = 0.0) {
    return {Kind::Superposition, a, b, phase};
  }
};

struct TwoExcitationResult {
  CVector state;
  RMatrix gamma;
  double norm = 1.0;
};

/// Exact evolution inside the two-photon sector by a Hermitian eigendecomposition.
inline TwoExcitationResult two_excitation_evolve(const LatticeSpec& spec, const TwoPhotonInitial& initial, double t) {
  spec.validate();
  const std::size_t n = spec.n_modes;
  check_mode(initial.k, n);
  check_mode(initial.l, n);
  TwoExcitationBasis basis(n);
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  const CMatrix c = build_coupling_matrix(spec).entries();

  CMatrix h = CMatrix::Zero(dim, dim);
  for (std::size_t s = 0; s < basis.dimension(); ++s) {
    auto [p, q] = basis.state(s);
    std::vector<std::size_t> occ(n, 0);
    ++occ[p];
    ++occ[q];
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const Complex cjk = c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
        if (j == k || cjk == Complex(0) || occ[k] == 0) continue;
        std::vector<std::size_t> after = occ;
        const double amp = std::sqrt(static_cast<double>(after[k]));
        --after[k];
        const double amp2 = std::sqrt(static_cast<double>(after[j] + 1));
        ++after[j];
        std::size_t a = n, b = n;
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t u = 0; u < after[r]; ++u) (a == n ? a : b) = r;
        }
        const std::size_t target = basis.index(Mode(a + 1), Mode(b + 1));
        h(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(s)) += cjk * amp * amp2;
      }
    }
  }

  CVector psi = CVector::Zero(dim);
  if (initial.kind == TwoPhotonInitial::Kind::Product) {
    detail::require(initial.k != initial.l, "product state needs two distinct modes");
    psi(static_cast<Eigen::Index>(basis.index(initial.k, initial.l))) = 1.0;
  } else {
    detail::require(initial.k != initial.l, "superposition needs two distinct modes");
    psi(static_cast<Eigen::Index>(basis.index(initial.k, initial.k))) = 1.0 / std::sqrt(2.0);
    psi(static_cast<Eigen::Index>(basis.index(initial.l, initial.l))) = std::polar(1.0 / std::sqrt(2.0), initial.phase);
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw NumericError("two-excitation eigendecomposition failed");
  CVector phase(dim);
  for (Eigen::Index k = 0; k < dim; ++k) phase(k) = std::polar(1.0, -eig.eigenvalues()(k) * t);
  const CMatrix& u = eig.eigenvectors();
  CVector out = u * phase.asDiagonal() * (u.adjoint() * psi);

  TwoExcitationResult res;
  res.norm = out.norm();
  res.gamma = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < basis.dimension(); ++s) {
    auto [p, q] = basis.state(s);
    const double w = std::norm(out(static_cast<Eigen::Index>(s)));
    if (p == q) {
      res.gamma(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) = 2.0 * w;
    } else {
      res.gamma(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = w;
      res.gamma(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = w;
    }
  }
  res.state = std::move(out);
  return res;
}

}  // namespace tbprop
