#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tbprop/types.hpp"

namespace tbprop {

enum class Topology { Open, Closed };

inline const char* to_string(Topology t) { return t == Topology::Open ? "open" : "closed"; }

/// A one-dimensional nearest-neighbour lattice with couplings C*exp(i*delta_j).
///
/// Open chains carry N-1 phases (link j couples modes j and j+1); closed rings
/// carry N phases, the last one on the link from mode N back to mode 1.
struct LatticeSpec {
  std::size_t n_modes = 1;
  Topology topology = Topology::Open;
  double amplitude = 1.0;
  std::vector<double> phases;

  static LatticeSpec open(std::size_t n, double c, std::vector<double> phases) {
    LatticeSpec s{n, Topology::Open, c, std::move(phases)};
    s.validate();
    return s;
  }
  static LatticeSpec open(std::size_t n, double c = 1.0) {
    return open(n, c, std::vector<double>(n > 0 ? n - 1 : 0, 0.0));
  }
  static LatticeSpec closed(std::size_t n, double c, std::vector<double> phases) {
    LatticeSpec s{n, Topology::Closed, c, std::move(phases)};
    s.validate();
    return s;
  }
  static LatticeSpec closed(std::size_t n, double c = 1.0) {
    return closed(n, c, std::vector<double>(n, 0.0));
  }

  std::size_t expected_phase_count() const {
    if (topology == Topology::Closed) return n_modes;
    return n_modes > 0 ? n_modes - 1 : 0;
  }

  void validate() const {
    detail::require(n_modes >= 1, "lattice needs at least one mode");
    detail::require(std::isfinite(amplitude) && amplitude >= 0.0,
                    "coupling amplitude must be finite and nonnegative");
    if (topology == Topology::Closed) {
      detail::require(n_modes >= 3, "closed topology requires at least 3 modes");
    }
    if (phases.size() != expected_phase_count()) {
      throw ValidationError("expected " + std::to_string(expected_phase_count()) +
                            " phases for " + to_string(topology) + " lattice of " +
                            std::to_string(n_modes) + " modes, got " +
                            std::to_string(phases.size()));
    }
    for (double d : phases) detail::require(std::isfinite(d), "phases must be finite");
  }

  /// True when every link carries the same phase (within tol).
  bool uniform_phase(double tol = 1e-12) const {
    for (double d : phases) {
      if (std::abs(d - phases.front()) > tol) return false;
    }
    return true;
  }

  LatticeSpec with_phases(std::vector<double> p) const {
    LatticeSpec s{n_modes, topology, amplitude, std::move(p)};
    s.validate();
    return s;
  }
};

class CouplingMatrix {
 public:
  /// Wraps an arbitrary Hermitian matrix (any graph); checked on entry.
  static CouplingMatrix from_entries(CMatrix entries, double tol = 1e-12) {
    detail::require(entries.rows() == entries.cols() && entries.rows() > 0,
                    "coupling matrix must be square and nonempty");
    double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (asym > tol * scale) throw ValidationError("coupling matrix is not Hermitian");
    return CouplingMatrix(std::move(entries));
  }

  const CMatrix& entries() const { return entries_; }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  Complex operator()(Mode m, Mode n) const { return entries_(m.offset(), n.offset()); }

 private:
  explicit CouplingMatrix(CMatrix e) : entries_(std::move(e)) {}
  friend CouplingMatrix build_coupling_matrix(const LatticeSpec&);

  CMatrix entries_;
};

inline CouplingMatrix build_coupling_matrix(const LatticeSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_modes);
  CMatrix c = CMatrix::Zero(n, n);
  auto link = [&](Eigen::Index a, Eigen::Index b, double delta) {
    const Complex v = std::polar(spec.amplitude, delta);
    c(a, b) = v;
    c(b, a) = std::conj(v);
  };
  for (Eigen::Index j = 0; j + 1 < n; ++j) link(j, j + 1, spec.phases[j]);
  if (spec.topology == Topology::Closed) link(n - 1, 0, spec.phases[n - 1]);
  return CouplingMatrix(std::move(c));
}

/// Cumulative phases Delta_k of an open chain.
class PhaseTable {
 public:
  explicit PhaseTable(std::vector<double> cumulative) : cumulative_(std::move(cumulative)) {}

  /// Delta_k for k = 0..N-1.
  double cumulative(std::size_t k) const { return cumulative_.at(k); }
  const std::vector<double>& cumulative() const { return cumulative_; }
  std::size_t size() const { return cumulative_.size(); }

  /// phi_{m,n} = Delta_{m-1} - Delta_{n-1}.
  double phi(Mode m, Mode n) const {
    return cumulative_.at(m.offset()) - cumulative_.at(n.offset());
  }

 private:
  std::vector<double> cumulative_;
};

inline PhaseTable phase_table(const LatticeSpec& spec) {
  spec.validate();
  if (spec.topology != Topology::Open) {
    throw UnsupportedError("phase table is defined for open chains only");
  }
  std::vector<double> delta(spec.n_modes, 0.0);
  for (std::size_t k = 1; k < spec.n_modes; ++k) delta[k] = delta[k - 1] + spec.phases[k - 1];
  return PhaseTable(std::move(delta));
}

}  // namespace tbprop
