#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tbprop/lattice.hpp"

namespace tbprop {

using BigInt = boost::multiprecision::cpp_int;

/// Exact integer sequence obeying S_{n+r} = sum_i Q_i S_{n+r-i} for n >= offset.
///
/// `initial` follows the convention (S_{offset+r-1}, ..., S_{offset}), latest
/// term first. Terms before `offset` are kept verbatim; they belong to the
/// generating function's numerator and do not satisfy the recursion.
class IntegerSequence {
 public:
  IntegerSequence(std::vector<BigInt> recursion_coeffs, std::vector<BigInt> terms, std::size_t offset)
      : q_(std::move(recursion_coeffs)), terms_(std::move(terms)), offset_(offset) {
    detail::require(!q_.empty(), "recursion needs at least one coefficient");
    detail::require(terms_.size() >= offset_ + q_.size(), "not enough terms to seed the recursion");
  }

  static IntegerSequence from_recursion(std::vector<BigInt> q, const std::vector<BigInt>& initial,
                                        std::size_t count) {
    detail::require(initial.size() == q.size(), "initial vector length must equal recursion order");
    std::vector<BigInt> terms(initial.rbegin(), initial.rend());
    IntegerSequence s(std::move(q), std::move(terms), 0);
    s.extend(count);
    return s;
  }

  std::size_t order() const { return q_.size(); }
  std::size_t offset() const { return offset_; }
  /// First index from which every term follows from its r predecessors.
  std::size_t recursion_start() const { return offset_ + q_.size(); }
  const std::vector<BigInt>& recursion_coeffs() const { return q_; }
  const std::vector<BigInt>& terms() const { return terms_; }

  std::vector<BigInt> initial() const {
    return std::vector<BigInt>(terms_.rbegin() + static_cast<std::ptrdiff_t>(terms_.size() - recursion_start()),
                               terms_.rend() - static_cast<std::ptrdiff_t>(offset_));
  }

  void extend(std::size_t count) {
    while (terms_.size() < count) {
      const std::size_t n = terms_.size();
      BigInt next = 0;
      for (std::size_t i = 1; i <= q_.size(); ++i) next += q_[i - 1] * terms_[n - i];
      terms_.push_back(std::move(next));
    }
  }

  BigInt term(std::size_t j) const {
    if (j < terms_.size()) return terms_[j];
    IntegerSequence copy = *this;
    copy.extend(j + 1);
    return copy.terms_[j];
  }

  bool satisfies_recursion() const {
    for (std::size_t n = recursion_start(); n < terms_.size(); ++n) {
      BigInt s = 0;
      for (std::size_t i = 1; i <= q_.size(); ++i) s += q_[i - 1] * terms_[n - i];
      if (s != terms_[n]) return false;
    }
    return true;
  }

 private:
  std::vector<BigInt> q_;
  std::vector<BigInt> terms_;
  std::size_t offset_;
};

namespace detail {

inline constexpr std::size_t kMaxExactOrder = 64;

/// Unit adjacency step y = J x on a path or cycle.
inline std::vector<BigInt> adjacency_step(const std::vector<BigInt>& x, Topology topology,
                                          const BigInt& loop_weight = 0) {
  const std::size_t n = x.size();
  std::vector<BigInt> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    BigInt s = loop_weight * x[i];
    if (i > 0) s += x[i - 1];
    if (i + 1 < n) s += x[i + 1];
    if (topology == Topology::Closed && n > 2) {
      if (i == 0) s += x[n - 1];
      if (i == n - 1) s += x[0];
    }
    y[i] = std::move(s);
  }
  return y;
}

using Polynomial = std::vector<BigInt>;

inline Polynomial poly_sub_shifted(const Polynomial& a, const Polynomial& b) {
  Polynomial out(std::max(a.size(), b.size() + 1), BigInt(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i + 1] -= b[i];
  while (out.size() > 1 && out.back() == 0) out.pop_back();
  return out;
}

}  // namespace detail

/// Integer coefficients c_k = (J^k)_{m,n} of the zero-phase, unit-amplitude series.
///
/// Obtained from the commutator recursion L_{k+1} = -J^T L_k, L_0 = e_m, as
/// c_k = (-1)^k (L_k)_n. The (Ct)^k coefficient of A_{m,n} is (-i)^k c_k / k!
/// up to the gauge phase.
inline std::vector<BigInt> bch_coefficients(const LatticeSpec& spec, Mode m, Mode n, std::size_t order) {
  spec.validate();
  check_mode(m, spec.n_modes);
  check_mode(n, spec.n_modes);
  if (order > detail::kMaxExactOrder) {
    throw ResourceError("BCH order " + std::to_string(order) + " exceeds exact budget of " +
                        std::to_string(detail::kMaxExactOrder));
  }
  std::vector<BigInt> lambda(spec.n_modes, BigInt(0));
  lambda[m.offset()] = 1;
  std::vector<BigInt> out;
  out.reserve(order + 1);
  for (std::size_t k = 0; k <= order; ++k) {
    out.push_back(k % 2 == 0 ? lambda[n.offset()] : BigInt(-lambda[n.offset()]));
    // The unit adjacency matrix is symmetric, so J^T = J.
    lambda = detail::adjacency_step(lambda, spec.topology);
    for (auto& v : lambda) v = -v;
  }
  return out;
}

/// Coefficients split by net displacement d (forward minus backward hops).
///
/// On a ring each branch carries the phase factor exp(i d delta); the entry
/// for d reproduces the Bessel term J_|d| of the closed-form series. For an
/// open chain the only key is n - m.
inline std::map<long, std::vector<BigInt>> bch_coefficients_by_winding(const LatticeSpec& spec, Mode m,
                                                                       Mode n, std::size_t order) {
  spec.validate();
  check_mode(m, spec.n_modes);
  check_mode(n, spec.n_modes);
  if (order > detail::kMaxExactOrder) {
    throw ResourceError("BCH order " + std::to_string(order) + " exceeds exact budget of " +
                        std::to_string(detail::kMaxExactOrder));
  }
  const long nn = static_cast<long>(spec.n_modes);
  const long start = static_cast<long>(m.offset());
  const long target = static_cast<long>(n.offset());
  std::map<long, BigInt> walkers{{start, BigInt(1)}};
  std::map<long, std::vector<BigInt>> out;
  for (std::size_t k = 0; k <= order; ++k) {
    for (const auto& [p, count] : walkers) {
      const bool hit = spec.topology == Topology::Closed ? ((p % nn) + nn) % nn == target : p == target;
      if (!hit) continue;
      auto& row = out[p - start];
      if (row.empty()) row.assign(order + 1, BigInt(0));
      row[k] += count;
    }
    std::map<long, BigInt> next;
    for (const auto& [p, count] : walkers) {
      for (long step : {-1L, 1L}) {
        const long q = p + step;
        if (spec.topology == Topology::Open && (q < 0 || q >= nn)) continue;
        next[q] += count;
      }
    }
    walkers = std::move(next);
  }
  return out;
}

/// Sequence generated by G_N(x) = 1/(1 - x G_{N-1}(x)), G_1 = 1, by exact series division.
inline IntegerSequence generating_sequence(std::size_t n, std::size_t count) {
  detail::require(n >= 2, "generating_sequence needs N >= 2");
  detail::Polynomial p{BigInt(1)}, q{BigInt(1)};
  for (std::size_t k = 2; k <= n; ++k) {
    detail::Polynomial q_next = detail::poly_sub_shifted(q, p);
    p = q;
    q = std::move(q_next);
  }
  const std::size_t r = q.size() - 1;
  std::vector<BigInt> rec(r);
  for (std::size_t i = 1; i <= r; ++i) rec[i - 1] = -q[i];
  const std::size_t deg_p = p.size() - 1;
  const std::size_t offset = deg_p + 1 > r ? deg_p + 1 - r : 0;

  const std::size_t total = std::max(count, offset + r);
  std::vector<BigInt> terms(total);
  for (std::size_t k = 0; k < total; ++k) {
    BigInt s = k < p.size() ? p[k] : BigInt(0);
    for (std::size_t i = 1; i <= std::min(k, r); ++i) s -= q[i] * terms[k - i];
    terms[k] = std::move(s);
  }
  return IntegerSequence(std::move(rec), std::move(terms), offset);
}

/// phi_k = 2 cos(k pi / (N+1)), k = 1..N, descending.
inline std::vector<double> recursion_eigenvalues(std::size_t n) {
  detail::require(n >= 1, "recursion_eigenvalues needs N >= 1");
  std::vector<double> out(n);
  for (std::size_t k = 1; k <= n; ++k) {
    out[k - 1] = 2.0 * std::cos(static_cast<double>(k) * kPi / static_cast<double>(n + 1));
  }
  return out;
}

template <class Real>
struct BinetResult {
  BigInt value;
  Real closed_form{};
  bool fell_back = false;
  std::string warning;
};

namespace detail {

template <class Real>
BigInt round_to_bigint(const Real& v) {
  using std::round;
  if constexpr (std::is_floating_point_v<Real>) {
    if (!std::isfinite(v)) throw NumericError("Binet evaluation is not finite");
    return BigInt(round(v));
  } else {
    Real r = round(v);
    return r.template convert_to<BigInt>();
  }
}

template <class Real>
Real to_real(const BigInt& v) {
  if constexpr (std::is_floating_point_v<Real>) {
    return v.template convert_to<Real>();
  } else {
    return Real(v);
  }
}

}  // namespace detail

/// Evaluates S_j = sum_l eta_l phi_l^j with eta from the Vandermonde system on
/// the recursion window, rounds, and checks against the exact recursion.
///
/// `eigvals` are the roots of x^r - Q_1 x^{r-1} - ... - Q_r; they are polished
/// by Newton steps in Real before use.
template <class Real>
BinetResult<Real> binet_term(const IntegerSequence& seq, std::span<const Real> eigvals, std::size_t j) {
  using std::abs;
  const std::size_t r = seq.order();
  if (eigvals.size() != r) {
    throw ValidationError("binet_term needs " + std::to_string(r) + " roots, got " +
                          std::to_string(eigvals.size()));
  }
  const BigInt exact = seq.term(j);
  BinetResult<Real> out;
  out.value = exact;
  if (j < seq.offset()) {
    out.fell_back = true;
    out.warning = "index precedes the recursion window; returning the stored term";
    out.closed_form = detail::to_real<Real>(exact);
    return out;
  }

  std::vector<Real> q(r);
  for (std::size_t i = 0; i < r; ++i) q[i] = detail::to_real<Real>(seq.recursion_coeffs()[i]);
  std::vector<Real> phi(eigvals.begin(), eigvals.end());
  for (auto& x : phi) {
    for (int it = 0; it < 8; ++it) {
      // p(x) = x^r - sum q_i x^{r-i} by Horner, with derivative.
      Real p = 1, dp = 0;
      for (std::size_t i = 0; i < r; ++i) {
        dp = dp * x + p;
        p = p * x - q[i];
      }
      if (dp == 0) break;
      x -= p / dp;
    }
  }

  Real scale = 0, gap = -1;
  for (std::size_t a = 0; a < r; ++a) {
    scale = std::max<Real>(scale, abs(phi[a]));
    for (std::size_t b = a + 1; b < r; ++b) {
      Real d = abs(phi[a] - phi[b]);
      if (gap < 0 || d < gap) gap = d;
    }
  }
  if (r > 1 && (gap <= 0 || gap < Real(1e-8) * std::max<Real>(scale, Real(1)))) {
    out.fell_back = true;
    out.warning = "near-degenerate roots; Vandermonde system ill-conditioned, using recursion";
    out.closed_form = detail::to_real<Real>(exact);
    return out;
  }

  // Rows: phi_l^(offset + i) eta_l = S_(offset + i).
  std::vector<std::vector<Real>> m(r, std::vector<Real>(r + 1));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t l = 0; l < r; ++l) {
      Real pw = 1;
      for (std::size_t e = 0; e < seq.offset() + i; ++e) pw *= phi[l];
      m[i][l] = pw;
    }
    m[i][r] = detail::to_real<Real>(seq.terms()[seq.offset() + i]);
  }
  for (std::size_t c = 0; c < r; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < r; ++i) {
      if (abs(m[i][c]) > abs(m[piv][c])) piv = i;
    }
    if (m[piv][c] == 0) {
      out.fell_back = true;
      out.warning = "singular Vandermonde system; using recursion";
      out.closed_form = detail::to_real<Real>(exact);
      return out;
    }
    std::swap(m[c], m[piv]);
    for (std::size_t i = 0; i < r; ++i) {
      if (i == c) continue;
      const Real f = m[i][c] / m[c][c];
      for (std::size_t k = c; k <= r; ++k) m[i][k] -= f * m[c][k];
    }
  }
  Real value = 0;
  for (std::size_t l = 0; l < r; ++l) {
    Real pw = 1;
    for (std::size_t e = 0; e < j; ++e) pw *= phi[l];
    value += (m[l][r] / m[l][l]) * pw;
  }
  out.closed_form = value;
  const BigInt rounded = detail::round_to_bigint(value);
  if (rounded != exact) {
    throw NumericError("Binet closed form disagrees with recursion at index " + std::to_string(j) +
                       ": " + rounded.str() + " vs " + exact.str());
  }
  return out;
}

template <class Real>
BinetResult<Real> binet_term(const IntegerSequence& seq, const std::vector<Real>& eigvals, std::size_t j) {
  return binet_term<Real>(seq, std::span<const Real>(eigvals), j);
}

struct PathCountQuery {
  Mode i{1};
  Mode j{1};
  std::size_t length = 0;
  Topology topology = Topology::Open;
  std::size_t n_vertices = 1;

  void validate() const {
    detail::require(n_vertices >= 1, "path count needs at least one vertex");
    if (topology == Topology::Closed) detail::require(n_vertices >= 3, "cycle graph needs N >= 3");
    check_mode(i, n_vertices, "vertex");
    check_mode(j, n_vertices, "vertex");
  }
};

/// Number of length-m walks between two vertices from the spectral closed form.
///
/// Cycles use the N-point sum for every N.
inline BigInt path_count(const PathCountQuery& query) {
  query.validate();
  const double m = static_cast<double>(query.length);
  const double fi = static_cast<double>(query.i.number());
  const double fj = static_cast<double>(query.j.number());
  double z = 0.0;
  if (query.topology == Topology::Open) {
    const double h = kPi / static_cast<double>(query.n_vertices + 1);
    for (std::size_t k = 1; k <= query.n_vertices; ++k) {
      const double fk = static_cast<double>(k);
      z += std::pow(2.0 * std::cos(fk * h), m) * std::sin(fi * fk * h) * std::sin(fj * fk * h);
    }
    z *= 2.0 / static_cast<double>(query.n_vertices + 1);
  } else {
    const double n = static_cast<double>(query.n_vertices);
    for (std::size_t k = 0; k < query.n_vertices; ++k) {
      const double fk = static_cast<double>(k);
      z += std::pow(2.0 * std::cos(fk * 2.0 * kPi / n), m) * std::cos(fk * 2.0 * kPi * (fi - fj) / n);
    }
    z /= n;
  }
  const double rounded = std::round(z);
  if (std::abs(z) >= 0x1p52) {
    throw NumericError("path count of length " + std::to_string(query.length) +
                       " exceeds the exactly representable range; use path_count_oracle");
  }
  if (std::abs(z - rounded) >= 1e-6) {
    throw NumericError("path count residual " + std::to_string(std::abs(z - rounded)) +
                       " exceeds 1e-6 for length " + std::to_string(query.length));
  }
  return BigInt(rounded);
}

/// e_i^T J^m e_j with exact integer matrix-vector products; loop_weight on the diagonal.
inline BigInt path_count_oracle(const PathCountQuery& query, long loop_weight = 0) {
  query.validate();
  if (query.length > detail::kMaxExactOrder) {
    throw ValidationError("path_count_oracle supports lengths up to 64");
  }
  std::vector<BigInt> v(query.n_vertices, BigInt(0));
  v[query.j.offset()] = 1;
  for (std::size_t k = 0; k < query.length; ++k) {
    v = detail::adjacency_step(v, query.topology, BigInt(loop_weight));
  }
  return v[query.i.offset()];
}

}  // namespace tbprop
