#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace dcdual;

namespace {

ProblemInstance tri() { return validate_instance(oracle::p_tri()); }
ProblemInstance pmin() { return validate_instance(oracle::p_min()); }

// -J1*(v0) recomputed with an explicit inverse of S = A + sum v0_j B_j.
double minus_j1(const RawInstance& raw, const Vector& v0) {
  Matrix s = raw.A;
  for (int j = 0; j < raw.N; ++j) s += v0(j) * raw.B[static_cast<std::size_t>(j)];
  const Matrix inv = s.inverse();
  double value = 0.5 * oracle::quad(inv, raw.f, raw.f);
  for (int j = 0; j < raw.N; ++j) value += v0(j) * v0(j) / (2.0 * raw.gamma(j)) - raw.c(j) * v0(j);
  return value;
}

double smallest_abs_eigenvalue(const RawInstance& raw, const Vector& v0) {
  Matrix s = raw.A;
  for (int j = 0; j < raw.N; ++j) s += v0(j) * raw.B[static_cast<std::size_t>(j)];
  return Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().cwiseAbs().minCoeff();
}

}  // namespace

TEST(Baseline, HandValues) {
  const Vector one = oracle::vec({1.0});
  EXPECT_DOUBLE_EQ(j1_star_value(pmin(), one), -0.5);
  EXPECT_DOUBLE_EQ(j1_star_gradient(pmin(), one)(0), 0.0);
  EXPECT_DOUBLE_EQ(j1_star_hessian(pmin(), one)(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(j1_star_gradient(pmin(), oracle::vec({0.0}))(0), -1.0);

  const Vector two = oracle::vec({2.0});
  EXPECT_DOUBLE_EQ(j1_star_value(tri(), two), 2.0);
  EXPECT_DOUBLE_EQ(j1_star_gradient(tri(), two)(0), 2.0);
  EXPECT_DOUBLE_EQ(j1_star_hessian(tri(), two)(0, 0), 1.0);
}

TEST(Baseline, SingularOperatorIsReported) {
  // A + v0 B = -1 + 1 = 0.
  try {
    j1_star_value(tri(), oracle::vec({1.0}));
    FAIL() << "expected singular-matrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_matrix);
  }
  EXPECT_THROW(j1_star_hessian(tri(), oracle::vec({1.0})), Error);
}

TEST(Baseline, ZeroForcingGivesDiagonalHessian) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    RawInstance raw = oracle::random_raw(rng, 1 + trial % 4, 1 + trial % 3);
    raw.f.setZero();
    const ProblemInstance p = validate_instance(raw);
    const Vector v0 = oracle::random_vector(rng, raw.N, 0.3);
    if (smallest_abs_eigenvalue(raw, v0) < 1e-3) continue;
    const Matrix h = j1_star_hessian(p, v0);
    EXPECT_EQ(h, Matrix(raw.gamma.cwiseInverse().asDiagonal()));
  }
}

TEST(Baseline, DerivativesAgainstFiniteDifferences) {
  std::mt19937_64 rng(62);
  int checked = 0;
  while (checked < 100) {
    const int n = 1 + checked % 4;
    const int nn = 1 + checked % 3;
    const RawInstance raw = oracle::random_raw(rng, n, nn);
    const ProblemInstance p = validate_instance(raw);
    const Vector v0 = oracle::random_vector(rng, nn, 1.0);
    if (smallest_abs_eigenvalue(raw, v0) < 0.2) continue;
    const auto value = [&](const Vector& v) { return minus_j1(raw, v); };
    EXPECT_NEAR(j1_star_value(p, v0), value(v0), 1e-10 * (1.0 + std::abs(value(v0))));
    EXPECT_LE(oracle::rel_inf(j1_star_gradient(p, v0), oracle::fd_gradient(value, v0)), 1e-5);
    const auto grad = [&](const Vector& v) { return j1_star_gradient(p, v); };
    EXPECT_LE(oracle::rel_fro(j1_star_hessian(p, v0), oracle::fd_jacobian(grad, v0)), 1e-4);
    ++checked;
  }
}

TEST(Correspondence, HandInstances) {
  const ProblemInstance q = pmin();
  const BaselineReport a = correspondence_report(q, lift_to_dual(q, oracle::vec({0.0})));
  EXPECT_TRUE(a.correspondence);
  EXPECT_TRUE(a.scalar_pd_case);
  EXPECT_TRUE(a.scalar_agreement);
  EXPECT_DOUBLE_EQ(a.s_margin, 2.0);
  EXPECT_DOUBLE_EQ(a.minus_j1_value, -0.5);

  // At the local maximum of P_tri the primal Hessian is -1 and the baseline Hessian is 1/gamma = 1.
  const ProblemInstance p = tri();
  const BaselineReport b = correspondence_report(p, lift_to_dual(p, oracle::vec({0.0})));
  EXPECT_FALSE(b.correspondence);
  EXPECT_FALSE(b.scalar_pd_case);
  EXPECT_EQ(b.primal_hessian_inertia.negative, 1);
  EXPECT_EQ(b.baseline_hessian_inertia.positive, 1);

  EXPECT_THROW(correspondence_report(p, lift_to_dual(p, oracle::vec({std::sqrt(2.0)}))), Error);
}

TEST(Correspondence, ScalarPositiveDefiniteCaseAlwaysAgrees) {
  // With S = A + v0 B > 0 both Hessians are sums of positive terms.
  std::mt19937_64 rng(63);
  int pd_pairs = 0;
  for (int i = 0; i < 200; ++i) {
    const ProblemInstance p = validate_instance(oracle::random_raw(rng, 1, 1));
    for (const Vector& x : multistart(p, 8, 300 + i).points) {
      const CriticalPair pair = lift_to_dual(p, x);
      BaselineReport r;
      try {
        r = correspondence_report(p, pair);
      } catch (const Error&) {
        continue;
      }
      if (!r.scalar_pd_case) continue;
      EXPECT_TRUE(r.scalar_agreement);
      EXPECT_EQ(r.primal_hessian_inertia.positive, 1);
      ++pd_pairs;
    }
  }
  EXPECT_GT(pd_pairs, 20);
}

TEST(Correspondence, FailsBeyondTheScalarCase) {
  // Look for a local minimum of J whose baseline Hessian is not positive definite.
  int found = 0;
  for (int i = 0; i < 400 && found == 0; ++i) {
    const ProblemInstance p = validate_instance(random_instance(instance_seed(17, i), 2, 1));
    for (const Vector& x : multistart(p, 16, 17).points) {
      const CriticalPair pair = lift_to_dual(p, x);
      BaselineReport r;
      try {
        r = correspondence_report(p, pair);
      } catch (const Error&) {
        continue;
      }
      if (r.primal_hessian_inertia.positive == 2 && r.baseline_hessian_inertia.positive == 0) {
        EXPECT_FALSE(r.correspondence);
        EXPECT_LT(r.s_margin, 0.0);
        ++found;
      }
    }
  }
  EXPECT_GT(found, 0);
}
