#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include "tbprop/propagator.hpp"
#include "tbprop/sequences.hpp"
#include "test_support.hpp"

using namespace tbprop;
using Dec50 = boost::multiprecision::cpp_dec_float_50;

namespace {

std::vector<BigInt> ints(std::initializer_list<long long> xs) {
  std::vector<BigInt> out;
  for (long long x : xs) out.emplace_back(x);
  return out;
}

std::vector<BigInt> prefix(const std::vector<BigInt>& v, std::size_t n) {
  return std::vector<BigInt>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
}

std::vector<BigInt> every_other(const std::vector<BigInt>& v, std::size_t first) {
  std::vector<BigInt> out;
  for (std::size_t k = first; k < v.size(); k += 2) out.push_back(v[k]);
  return out;
}

const std::vector<std::vector<long long>> kTableRows = {
    {1, 1, 1, 1, 1, 1, 1},
    {1, 1, 2, 4, 8, 16, 32},
    {1, 1, 2, 5, 13, 34, 89, 233},
    {1, 1, 2, 5, 14, 41, 122, 365},
    {1, 1, 2, 5, 14, 42, 131, 417},
    {1, 1, 2, 5, 14, 42, 132, 428},
    {1, 1, 2, 5, 14, 42, 132, 429},
};

}  // namespace

TEST(Bch, OpenTetramerOffDiagonalIsOddFibonacci) {
  auto c = bch_coefficients(LatticeSpec::open(4), Mode(1), Mode(2), 13);
  EXPECT_EQ(every_other(c, 1), ints({1, 2, 5, 13, 34, 89, 233}));
  for (std::size_t k = 0; k < c.size(); k += 2) EXPECT_EQ(c[k], 0);
}

TEST(Bch, OpenPentamerDiagonalIsTableRow) {
  auto c = bch_coefficients(LatticeSpec::open(5), Mode(1), Mode(1), 14);
  EXPECT_EQ(every_other(c, 0), ints({1, 1, 2, 5, 14, 41, 122, 365}));
}

TEST(Bch, ClosedPentamerWindingBranchIsCentralBinomial) {
  auto spec = LatticeSpec::closed(5);
  auto branches = bch_coefficients_by_winding(spec, Mode(1), Mode(2), 9);
  ASSERT_TRUE(branches.count(1));
  EXPECT_EQ(every_other(branches.at(1), 1), ints({1, 3, 10, 35, 126}));
  ASSERT_TRUE(branches.count(-4));
  EXPECT_EQ(every_other(branches.at(-4), 0), ints({0, 0, 1, 6, 28}));
  // The undivided coefficient adds every branch: 126 + 1 at order 9.
  auto total = bch_coefficients(spec, Mode(1), Mode(2), 9);
  EXPECT_EQ(total[9], 127);
  BigInt sum = 0;
  for (const auto& [d, row] : branches) sum += row[9];
  EXPECT_EQ(sum, total[9]);
}

TEST(Bch, WindingSeriesReproducesBesselEntry) {
  // Sum over branches of (-i)^k c_k (Ct)^k / k! * exp(i d delta) equals the ring entry.
  const double delta = 0.37, ct = 0.9;
  auto spec = LatticeSpec::closed(5, 1.0, std::vector<double>(5, delta));
  auto branches = bch_coefficients_by_winding(spec, Mode(1), Mode(2), 40);
  Complex sum = 0.0;
  for (const auto& [d, row] : branches) {
    double fact = 1.0, pw = 1.0;
    Complex mi = 1.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) {
        fact *= static_cast<double>(k);
        pw *= ct;
        mi *= -kI;
      }
      sum += mi * row[k].convert_to<double>() * pw / fact * std::polar(1.0, static_cast<double>(d) * delta);
    }
  }
  auto a = closed_transfer_bessel(spec, ct).entries();
  EXPECT_LT(std::abs(sum - a(0, 1)), 1e-12);
}

TEST(Bch, SeriesReproducesOpenTransfer) {
  const double ct = 0.6;
  auto spec = LatticeSpec::open(6);
  auto a = open_transfer(spec, ct).entries();
  for (std::size_t m = 1; m <= 6; ++m) {
    for (std::size_t n = 1; n <= 6; ++n) {
      auto c = bch_coefficients(spec, Mode(m), Mode(n), 40);
      Complex sum = 0.0, mi = 1.0;
      double term = 1.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (k > 0) {
          term *= ct / static_cast<double>(k);
          mi *= -kI;
        }
        sum += mi * c[k].convert_to<double>() * term;
      }
      EXPECT_LT(std::abs(sum - a(m - 1, n - 1)), 1e-13);
    }
  }
}

TEST(Bch, OrderBudget) {
  EXPECT_THROW(bch_coefficients(LatticeSpec::open(3), Mode(1), Mode(1), 65), ResourceError);
}

TEST(GeneratingSequence, TableRows) {
  for (std::size_t n = 2; n <= 8; ++n) {
    const auto& row = kTableRows[n - 2];
    std::vector<BigInt> expected(row.begin(), row.end());
    auto seq = generating_sequence(n, row.size());
    EXPECT_EQ(prefix(seq.terms(), row.size()), expected) << "N=" << n;
  }
}

TEST(GeneratingSequence, RecursionHoldsFromStart) {
  for (std::size_t n = 2; n <= 12; ++n) {
    auto seq = generating_sequence(n, 60);
    EXPECT_TRUE(seq.satisfies_recursion()) << "N=" << n;
    EXPECT_EQ(seq.order(), n / 2);
  }
  auto six = generating_sequence(6, 12);
  EXPECT_EQ(six.recursion_coeffs(), ints({5, -6, 1}));
}

TEST(GeneratingSequence, MatchesDiagonalBchAtEvenOrders) {
  for (std::size_t n = 2; n <= 10; ++n) {
    auto c = bch_coefficients(LatticeSpec::open(n), Mode(1), Mode(1), 40);
    auto seq = generating_sequence(n, 21);
    EXPECT_EQ(every_other(c, 0), prefix(seq.terms(), 21)) << "N=" << n;
  }
}

TEST(GeneratingSequence, Validation) { EXPECT_THROW(generating_sequence(1, 5), ValidationError); }

TEST(RecursionEigenvalues, SmallCases) {
  auto two = recursion_eigenvalues(2);
  EXPECT_NEAR(two[0], 1.0, 1e-15);
  EXPECT_NEAR(two[1], -1.0, 1e-15);
  auto four = recursion_eigenvalues(4);
  const double s5 = std::sqrt(5.0);
  EXPECT_NEAR(four[0], (1 + s5) / 2, 1e-15);
  EXPECT_NEAR(four[1], (s5 - 1) / 2, 1e-15);
  EXPECT_NEAR(four[2], -(s5 - 1) / 2, 1e-15);
  EXPECT_NEAR(four[3], -(1 + s5) / 2, 1e-15);
}

TEST(RecursionEigenvalues, MatchPathAdjacencySpectrum) {
  for (std::size_t n = 1; n <= 30; ++n) {
    auto phi = recursion_eigenvalues(n);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(build_coupling_matrix(LatticeSpec::open(n)).entries());
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(phi[k], eig.eigenvalues()(static_cast<Eigen::Index>(n - 1 - k)), 1e-12);
    }
  }
}

TEST(IntegerSequence, FibonacciBinet) {
  auto fib = IntegerSequence::from_recursion(ints({1, 1}), ints({1, 0}), 20);
  EXPECT_EQ(fib.term(10), 55);
  auto four = recursion_eigenvalues(4);
  std::vector<double> roots{four[0], four[2]};
  auto r = binet_term<double>(fib, roots, 10);
  EXPECT_EQ(r.value, 55);
  EXPECT_FALSE(r.fell_back);
  EXPECT_NEAR(r.closed_form, 55.0, 1e-9);
  EXPECT_EQ(binet_term<double>(fib, roots, 0).value, 0);
}

TEST(IntegerSequence, InitialVectorOrderIsLatestFirst) {
  auto s = IntegerSequence::from_recursion(ints({1, 2, -1}), ints({2, 0, 1}), 11);
  EXPECT_EQ(s.terms(), ints({1, 0, 2, 1, 5, 5, 14, 19, 42, 66, 131}));
  EXPECT_EQ(s.initial(), ints({2, 0, 1}));
  auto z = IntegerSequence::from_recursion(ints({1, 2, -1}), ints({1, 0, 0}), 12);
  EXPECT_EQ(z.terms(), ints({0, 0, 1, 1, 3, 4, 9, 14, 28, 47, 89, 155}));
  auto w = IntegerSequence::from_recursion(ints({1, 2, -1}), ints({2, 1, 1}), 11);
  EXPECT_EQ(w.terms(), ints({1, 1, 2, 3, 6, 10, 19, 33, 61, 108, 197}));
}

TEST(IntegerSequence, ClosedFormFromChebyshevRootsOnHexamerSequence) {
  // Characteristic roots of x^3 - x^2 - 2x + 1 are 2cos(k pi/7), k = 1, 3, 5.
  auto s = IntegerSequence::from_recursion(ints({1, 2, -1}), ints({2, 0, 1}), 40);
  auto phi = recursion_eigenvalues(6);
  std::vector<double> roots{phi[0], phi[2], phi[4]};
  for (std::size_t j = 0; j < 30; ++j) EXPECT_EQ(binet_term<double>(s, roots, j).value, s.term(j));
}

TEST(IntegerSequence, BinetMatchesRecursionForFortyTermsOfEveryTableRow) {
  for (std::size_t n = 2; n <= 8; ++n) {
    auto seq = generating_sequence(n, 40);
    auto phi = recursion_eigenvalues(n);
    std::vector<Dec50> roots;
    for (std::size_t k = 0; k < seq.order(); ++k) roots.push_back(Dec50(phi[k]) * Dec50(phi[k]));
    for (std::size_t j = 0; j < 40; ++j) {
      auto r = binet_term<Dec50>(seq, roots, j);
      EXPECT_EQ(r.value, seq.term(j)) << "N=" << n << " j=" << j;
    }
  }
}

TEST(IntegerSequence, DegenerateRootsFallBack) {
  auto s = IntegerSequence::from_recursion(ints({2, -1}), ints({1, 0}), 10);
  std::vector<double> roots{1.0, 1.0};
  auto r = binet_term<double>(s, roots, 6);
  EXPECT_TRUE(r.fell_back);
  EXPECT_FALSE(r.warning.empty());
  EXPECT_EQ(r.value, 6);
}

TEST(IntegerSequence, BinetRejectsWrongRootCount) {
  auto fib = IntegerSequence::from_recursion(ints({1, 1}), ints({1, 0}), 5);
  std::vector<double> roots{1.6};
  EXPECT_THROW(binet_term<double>(fib, roots, 3), ValidationError);
}

TEST(PathCount, SmallCases) {
  EXPECT_EQ(path_count({Mode(1), Mode(2), 1, Topology::Open, 2}), 1);
  EXPECT_EQ(path_count_oracle({Mode(2), Mode(2), 2, Topology::Open, 3}), 2);
  EXPECT_EQ(path_count_oracle({Mode(3), Mode(3), 0, Topology::Open, 5}), 1);
  EXPECT_EQ(path_count_oracle({Mode(3), Mode(2), 0, Topology::Open, 5}), 0);
}

TEST(PathCount, BipartiteParity) {
  for (std::size_t n = 2; n <= 8; ++n) {
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t m = 0; m <= 12; ++m) {
          if ((m + (i > j ? i - j : j - i)) % 2 == 1) {
            EXPECT_EQ(path_count({Mode(i), Mode(j), m, Topology::Open, n}), 0);
          }
        }
      }
    }
  }
}

TEST(PathCount, TetramerOddFibonacci) {
  std::vector<BigInt> got;
  for (std::size_t k = 0; k < 7; ++k) got.push_back(path_count({Mode(1), Mode(2), 2 * k + 1, Topology::Open, 4}));
  EXPECT_EQ(got, ints({1, 2, 5, 13, 34, 89, 233}));
}

TEST(PathCountProperty, ClosedFormEqualsOracle) {
  for (Topology topo : {Topology::Open, Topology::Closed}) {
    for (std::size_t n = topo == Topology::Open ? 1 : 3; n <= 8; ++n) {
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
          for (std::size_t m = 0; m <= 12; ++m) {
            PathCountQuery q{Mode(i), Mode(j), m, topo, n};
            EXPECT_EQ(path_count(q), path_count_oracle(q));
          }
        }
      }
    }
  }
}

TEST(PathCountProperty, BchEqualsPathCount) {
  check::Gen gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = gen.index(1, 9);
    Mode a(gen.index(1, n)), b(gen.index(1, n));
    auto c = bch_coefficients(LatticeSpec::open(n), a, b, 20);
    for (std::size_t k = 0; k <= 20; ++k) {
      EXPECT_EQ(c[k], path_count({b, a, k, Topology::Open, n}));
    }
  }
}

TEST(PathCount, LoopWeightOracle) {
  // Loops on P_2 with weight 1: J = [[1,1],[1,1]], J^3 = 4 J.
  EXPECT_EQ(path_count_oracle({Mode(1), Mode(2), 3, Topology::Open, 2}, 1), 4);
  EXPECT_THROW(path_count_oracle({Mode(1), Mode(2), 65, Topology::Open, 2}), ValidationError);
}

TEST(PathCount, ResidualCheckTripsForHugeLengths) {
  EXPECT_THROW(path_count({Mode(1), Mode(1), 200, Topology::Open, 8}), NumericError);
}
