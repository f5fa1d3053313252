#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "tbprop/lattice.hpp"
#include "test_support.hpp"

using namespace tbprop;

TEST(Lattice, RealDimer) {
  auto c = build_coupling_matrix(LatticeSpec::open(2, 1.0, {0.0})).entries();
  EXPECT_EQ(c(0, 0), Complex(0));
  EXPECT_EQ(c(0, 1), Complex(1));
  EXPECT_EQ(c(1, 0), Complex(1));
  EXPECT_EQ(c(1, 1), Complex(0));
}

TEST(Lattice, ComplexTrimer) {
  auto c = build_coupling_matrix(LatticeSpec::open(3, 1.0, {kPi / 2, 0.0})).entries();
  EXPECT_NEAR(std::abs(c(0, 1) - kI), 0.0, 1e-15);
  EXPECT_EQ(c(1, 2), Complex(1));
  EXPECT_EQ(c(1, 0), std::conj(c(0, 1)));
  EXPECT_EQ(c(0, 2), Complex(0));
  EXPECT_EQ(c(2, 0), Complex(0));
}

TEST(Lattice, ClosedCorners) {
  auto c = build_coupling_matrix(LatticeSpec::closed(4, 2.0)).entries();
  EXPECT_EQ(c(3, 0), Complex(2));
  EXPECT_EQ(c(0, 3), Complex(2));
  EXPECT_EQ(c(0, 2), Complex(0));
}

TEST(Lattice, ClosedLastPhaseOnWrapLink) {
  auto c = build_coupling_matrix(LatticeSpec::closed(3, 1.0, {0.0, 0.0, 0.7})).entries();
  EXPECT_NEAR(std::abs(c(2, 0) - std::polar(1.0, 0.7)), 0.0, 1e-15);
}

TEST(Lattice, Validation) {
  EXPECT_THROW(LatticeSpec::open(3, 1.0, {0.0}), ValidationError);
  EXPECT_THROW(LatticeSpec::closed(2, 1.0, {0.0, 0.0}), ValidationError);
  EXPECT_THROW(LatticeSpec::open(2, -1.0, {0.0}), ValidationError);
  EXPECT_THROW(LatticeSpec::open(0, 1.0, {}), ValidationError);
  EXPECT_NO_THROW(LatticeSpec::open(1, 1.0, {}));
}

TEST(PhaseTable, CumulativeSums) {
  auto p = phase_table(LatticeSpec::open(3, 1.0, {0.3, 0.5}));
  EXPECT_DOUBLE_EQ(p.cumulative(0), 0.0);
  EXPECT_NEAR(p.phi(Mode(3), Mode(1)), 0.8, 1e-15);
  EXPECT_NEAR(p.phi(Mode(1), Mode(3)), -0.8, 1e-15);
  EXPECT_EQ(p.phi(Mode(2), Mode(2)), 0.0);
}

TEST(PhaseTable, ClosedUnsupported) {
  EXPECT_THROW(phase_table(LatticeSpec::closed(3)), UnsupportedError);
}

TEST(LatticeProperty, HermitianAndGaugeSpectrum) {
  check::Gen gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto spec = gen.open_spec(1, 20);
    auto c = build_coupling_matrix(spec).entries();
    EXPECT_TRUE(c == c.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> a(c);
    Eigen::SelfAdjointEigenSolver<CMatrix> b(
        build_coupling_matrix(spec.with_phases(std::vector<double>(spec.n_modes - 1, 0.0))).entries());
    EXPECT_LT((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LatticeProperty, PhiTelescopes) {
  check::Gen gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto spec = gen.open_spec(2, 12);
    auto p = phase_table(spec);
    Mode m(gen.index(1, spec.n_modes)), n(gen.index(1, spec.n_modes)), q(gen.index(1, spec.n_modes));
    EXPECT_NEAR(p.phi(m, n) + p.phi(n, q), p.phi(m, q), 1e-12);
    EXPECT_EQ(p.phi(m, n), -p.phi(n, m));
  }
}

TEST(LatticeProperty, ArbitraryHermitianAccepted) {
  CMatrix c(2, 2);
  c << 0, Complex(1, 1), Complex(1, -1), 0;
  EXPECT_NO_THROW(CouplingMatrix::from_entries(c));
  c(1, 0) = Complex(1, 1);
  EXPECT_THROW(CouplingMatrix::from_entries(c), ValidationError);
}
