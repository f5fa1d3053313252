#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tbprop/fock.hpp"
#include "tbprop/wigner.hpp"
#include "test_support.hpp"

using namespace tbprop;

namespace {

const std::vector<double> kPentamerXi{0.1, 0.25, 0.3, 0.25, 0.1};

double grid_integral(const WignerGrid& w) {
  const double ha = w.a_values[1] - w.a_values[0], hb = w.b_values[1] - w.b_values[0];
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.values.cols(); ++j) {
      const double wi = (i == 0 || i == w.values.rows() - 1) ? 0.5 : 1.0;
      const double wj = (j == 0 || j == w.values.cols() - 1) ? 0.5 : 1.0;
      s += wi * wj * w.values(i, j);
    }
  }
  return s * ha * hb;
}

PhaseSpacePoint point(std::initializer_list<double> v) {
  RVector y(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) y(i++) = x;
  return PhaseSpacePoint(y);
}

}  // namespace

TEST(Axis, Parse) {
  auto a = QuadratureAxis::parse("p3");
  EXPECT_TRUE(a.momentum);
  EXPECT_EQ(a.mode.number(), 3u);
  EXPECT_EQ(a.index(5), 7u);
  EXPECT_EQ(QuadratureAxis::parse("q12").index(12), 11u);
  EXPECT_EQ(a.label(), "p3");
  for (const char* bad : {"", "q", "x3", "q0", "q3x", "p-1"}) EXPECT_THROW(QuadratureAxis::parse(bad), ValidationError);
  EXPECT_THROW(QuadratureAxis::parse("q6").index(5), ValidationError);
}

TEST(Kernel, VacuumAddedPhoton) {
  auto v = CovarianceMatrix::vacuum(2);
  auto g = ExcitationVector::single_mode(Mode(1), 2, ExcitationSign::Added);
  auto k = build_kernel(v, g, propagate(LatticeSpec::open(2), 0.0));
  RMatrix expected = RMatrix::Zero(4, 4);
  expected(0, 0) = 2.0;
  expected(2, 2) = 2.0;
  EXPECT_LT((k.a_initial() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(k.trace_term(), 4.0, 1e-14);
}

TEST(Kernel, SubtractionFromVacuumIsUndefined) {
  auto g = ExcitationVector::single_mode(Mode(1), 1, ExcitationSign::Subtracted);
  EXPECT_THROW(build_kernel(CovarianceMatrix::vacuum(1), g, propagate(LatticeSpec::open(1), 0.0)),
               UndefinedStateError);
}

TEST(Kernel, RankAtMostTwoAndPositive) {
  check::Gen gen(301);
  for (int trial = 0; trial < 20; ++trial) {
    auto spec = gen.open_spec(1, 6);
    const std::size_t n = spec.n_modes;
    std::vector<double> xi(n);
    for (auto& x : xi) x = gen.uniform(0.05, 0.5);
    const auto sign = gen.coin() ? ExcitationSign::Added : ExcitationSign::Subtracted;
    auto g = ExcitationVector::from_coefficients(gen.complex_vector(static_cast<Eigen::Index>(n)), sign);
    auto k = build_kernel(initial_covariance(SqueezeProfile::real(xi)), g, propagate(spec, gen.uniform(0, 3)));
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(k.a_matrix());
    const auto& ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    EXPECT_GT(ev.minCoeff(), -1e-10 * top);
    int rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) rank += ev(i) > 1e-9 * top;
    EXPECT_LE(rank, 2);
    EXPECT_LT((k.a_matrix() - k.a_matrix().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Wigner, GaussianPlugIn) {
  EXPECT_NEAR(gaussian_wigner(point({0, 0}), CovarianceMatrix::vacuum(1)), 1.0 / (2 * kPi), 1e-15);
  const double r = 0.4;
  auto v = initial_covariance(SqueezeProfile::real({r}));
  // Same density on the contour q^2 e^{2r} = p^2 e^{-2r}: aspect ratio e^{2r}.
  EXPECT_NEAR(gaussian_wigner(point({1.0, 0}), v), gaussian_wigner(point({0, std::exp(2 * r)}), v), 1e-15);
}

TEST(Wigner, SinglePhotonAtOrigin) {
  auto g = ExcitationVector::single_mode(Mode(1), 1, ExcitationSign::Added);
  auto k = build_kernel(CovarianceMatrix::vacuum(1), g, propagate(LatticeSpec::open(1), 0.0));
  EXPECT_NEAR(wigner_pm(point({0, 0}), k), -1.0 / (2 * kPi), 1e-12);
  EXPECT_LT(std::abs(wigner_pm(point({30, 0}), k)), 1e-100);
}

TEST(Wigner, NormalisedOnGrid) {
  check::Gen gen(302);
  for (auto sign : {ExcitationSign::Added, ExcitationSign::Subtracted}) {
    auto k1 = build_kernel(initial_covariance(SqueezeProfile::real({0.3})),
                           ExcitationVector::single_mode(Mode(1), 1, sign), propagate(LatticeSpec::open(1), 0.0));
    GridAxisSpec ax{-6, 6, 201};
    EXPECT_NEAR(grid_integral(marginal_2d(k1, QuadratureAxis::parse("q1"), QuadratureAxis::parse("p1"), ax, ax)), 1.0,
                1e-3);

    auto k2 = build_kernel(initial_covariance(SqueezeProfile::real({0.3, -0.2})),
                           ExcitationVector::from_coefficients(gen.complex_vector(2), sign),
                           propagate(LatticeSpec::open(2, 1.0, {0.5}), 0.7));
    // Direct 4-D trapezoid; spectral accuracy for Gaussian tails makes a coarse grid enough.
    const int m = 41;
    const double h = 12.0 / (m - 1);
    double s = 0;
    RVector y(4);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d) {
            y << -6 + a * h, -6 + b * h, -6 + c * h, -6 + d * h;
            s += wigner_pm(PhaseSpacePoint(y), k2);
          }
    EXPECT_NEAR(s * std::pow(h, 4), 1.0, 1e-3);
    EXPECT_NEAR(grid_integral(marginal_2d(k2, QuadratureAxis::parse("q1"), QuadratureAxis::parse("p2"), ax, ax)), 1.0,
                1e-3);
  }
}

TEST(Wigner, EvenInPhaseSpace) {
  check::Gen gen(303);
  auto k = build_kernel(initial_covariance(SqueezeProfile::real({0.2, 0.4, 0.1})),
                        ExcitationVector::from_coefficients(gen.complex_vector(3), ExcitationSign::Subtracted),
                        propagate(LatticeSpec::open(3, 1.0, {0.3, 0.9}), 1.1));
  for (int trial = 0; trial < 10; ++trial) {
    RVector y(6);
    for (Eigen::Index i = 0; i < 6; ++i) y(i) = gen.uniform(-2, 2);
    EXPECT_NEAR(wigner_pm(PhaseSpacePoint(y), k), wigner_pm(PhaseSpacePoint(-y), k), 1e-15);
  }
}

TEST(Wigner, MatchesFockOracle) {
  // Photon added to (or subtracted from) a two-mode squeezed product, then evolved.
  check::Gen gen(304);
  auto spec = LatticeSpec::open(2, 1.0, {0.6});
  const std::vector<double> xi{0.3, -0.15};
  const double t = 0.9;
  for (auto sign : {ExcitationSign::Added, ExcitationSign::Subtracted}) {
    CVector c(2);
    c << Complex(0.8, 0.1), Complex(-0.2, 0.5);
    auto g = ExcitationVector::from_coefficients(c, sign);
    auto k = build_kernel(initial_covariance(SqueezeProfile::real(xi)), g, propagate(spec, t));

    auto psi = prepare_fock_state(SqueezeProfile::real(xi), FockBasis(2, 30));
    psi = sign == ExcitationSign::Added ? apply_creation(psi, g.coefficients()) : apply_annihilation(psi, g.coefficients());
    psi = fock_evolve_state(spec, psi, t);

    double worst = 0;
    for (auto [u, v] : {std::pair{0.4, -0.3}, {-0.9, 0.2}}) {
      for (int i = 0; i < 41; ++i) {
        for (int j = 0; j < 41; ++j) {
          RVector y(4);
          y << -4 + 0.2 * i, u, -4 + 0.2 * j, v;
          worst = std::max(worst, std::abs(fock_wigner(psi, y) - wigner_pm(PhaseSpacePoint(y), k)));
        }
      }
    }
    EXPECT_LT(worst, 1e-4) << to_string(sign);
  }
}

TEST(Marginal, SingleModeEqualsPointwise) {
  auto k = build_kernel(initial_covariance(SqueezeProfile::real({0.35})),
                        ExcitationVector::single_mode(Mode(1), 1, ExcitationSign::Added), propagate(LatticeSpec::open(1), 2.0));
  auto w = marginal_2d(k, QuadratureAxis::parse("q1"), QuadratureAxis::parse("p1"), {-3, 3, 13}, {-3, 3, 13});
  for (std::size_t i = 0; i < 13; ++i) {
    for (std::size_t j = 0; j < 13; ++j) {
      EXPECT_NEAR(w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                  wigner_pm(point({w.a_values[i], w.b_values[j]}), k), 1e-14);
    }
  }
  // Swapped axes give the transposed grid.
  auto ws = marginal_2d(k, QuadratureAxis::parse("p1"), QuadratureAxis::parse("q1"), {-3, 3, 13}, {-3, 3, 13});
  EXPECT_LT((ws.values - w.values.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(marginal_2d(k, QuadratureAxis::parse("q1"), QuadratureAxis::parse("q1")), ValidationError);
}

TEST(Marginal, GaussianOnlyUsesSubBlock) {
  auto spec = LatticeSpec::open(3);
  auto k = build_kernel(initial_covariance(SqueezeProfile::real({0.1, 0.4, -0.2})),
                        ExcitationVector::single_mode(Mode(2), 3, ExcitationSign::Added), propagate(spec, 0.8));
  auto w = marginal_2d(k, QuadratureAxis::parse("q1"), QuadratureAxis::parse("p3"), {-2, 2, 5}, {-2, 2, 5}, false);
  const auto& v = k.v_evolved().entries();
  RMatrix sub(2, 2);
  sub << v(0, 0), v(0, 5), v(5, 0), v(5, 5);
  const RMatrix inv = sub.inverse();
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      Eigen::Vector2d x(w.a_values[i], w.b_values[j]);
      const double expected = std::exp(-0.5 * x.dot(inv * x)) / (2 * kPi * std::sqrt(sub.determinant()));
      EXPECT_NEAR(w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), expected, 1e-14);
    }
  }
}

TEST(Marginal, AgreesWithNumericIntegration) {
  auto k = build_kernel(initial_covariance(SqueezeProfile::real({0.3, -0.2})),
                        ExcitationVector::single_mode(Mode(1), 2, ExcitationSign::Added),
                        propagate(LatticeSpec::open(2, 1.0, {0.4}), 0.6));
  auto w = marginal_2d(k, QuadratureAxis::parse("q2"), QuadratureAxis::parse("p2"), {-1.5, 1.5, 4}, {-1, 1, 3});
  const int m = 161;
  const double h = 24.0 / (m - 1);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          s += wigner_pm(point({-12 + a * h, w.a_values[i], -12 + b * h, w.b_values[j]}), k);
        }
      }
      EXPECT_NEAR(w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), s * h * h, 1e-10);
    }
  }
}

TEST(Marginal, PentamerAddedToCentreIsNegativeOnlyThere) {
  auto k = build_kernel(initial_covariance(SqueezeProfile::real(kPentamerXi)),
                        ExcitationVector::single_mode(Mode(3), 5, ExcitationSign::Added),
                        propagate(LatticeSpec::open(5), 0.0));
  GridAxisSpec ax{-5, 5, 101};
  for (std::size_t m = 1; m <= 5; ++m) {
    QuadratureAxis q{false, Mode(m)}, p{true, Mode(m)};
    auto w = marginal_2d(k, q, p, ax, ax);
    if (m == 3) {
      EXPECT_LT(w.values(50, 50), 0.0);
    } else {
      EXPECT_GE(w.values.minCoeff(), -1e-6) << m;
    }
  }
}

TEST(Marginal, UniformAdditionStartsNonnegative) {
  auto k = build_kernel(initial_covariance(SqueezeProfile::real(kPentamerXi)),
                        ExcitationVector::uniform(5, ExcitationSign::Added), propagate(LatticeSpec::open(5), 0.0));
  GridAxisSpec ax{-5, 5, 101};
  for (std::size_t m = 1; m <= 5; ++m) {
    auto w = marginal_2d(k, {false, Mode(m)}, {true, Mode(m)}, ax, ax);
    EXPECT_GE(w.values.minCoeff(), -1e-6) << m;
  }
}
