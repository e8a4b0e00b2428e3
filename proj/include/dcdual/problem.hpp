// Problem instances for the quartic functional
//
//   J(x) = x'Ax/2 + sum_j gamma_j/2 (x'B_j x/2 + c_j)^2 + f'x
//
// and its difference-of-convex split J(x) = -G1(x) + G2(x, 0), where
//
//   G1(x)    = -x'Ax/2 + x'Kx/2 - f'x
//   G2(x, v) = sum_j gamma_j/2 (x'B_j x/2 + c_j + v_j)^2 + x'Kx/2.

#ifndef DCDUAL_PROBLEM_HPP
#define DCDUAL_PROBLEM_HPP

#include "dcdual/linalg.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dcdual {

/// Unchecked instance data as read from a file or produced by a generator.
struct RawInstance {
  int n = 0;
  int N = 0;
  Matrix A;
  std::vector<Matrix> B;
  Vector gamma;
  Vector c;
  Vector f;
  Matrix K;
  bool coercivity_override = false;

  /// Lifts a scalar k to k * I.
  void set_scalar_k(double k) { K = k * Matrix::Identity(n, n); }
};

struct CoercivityCheck {
  int directions = 0;
  double min_leading_value = 0.0;  // min_u sum_j gamma_j (u'B_j u / 2)^2 over |u| = 1
  bool passed = false;
  bool overridden = false;
};

class ProblemInstance;
ProblemInstance validate_instance(const RawInstance& raw);

/// Validated, immutable instance. Only validate_instance constructs one.
class ProblemInstance {
 public:
  int n() const { return static_cast<int>(a_.rows()); }
  int N() const { return static_cast<int>(b_.size()); }
  const Matrix& A() const { return a_; }
  const std::vector<Matrix>& B() const { return b_; }
  const Matrix& B(int j) const { return b_[static_cast<std::size_t>(j)]; }
  const Vector& gamma() const { return gamma_; }
  const Vector& c() const { return c_; }
  const Vector& f() const { return f_; }
  const Matrix& K() const { return k_; }
  const Matrix& K_minus_A() const { return kma_; }
  double k_minus_a_margin() const { return kma_margin_; }
  const CoercivityCheck& coercivity() const { return coercivity_; }

  /// (K - A)^{-1} rhs.
  Vector solve_k_minus_a(const Vector& rhs) const { return kma_llt_.solve(rhs); }
  Matrix k_minus_a_inverse() const { return kma_llt_.solve(Matrix::Identity(n(), n())); }

  RawInstance raw() const {
    RawInstance r;
    r.n = n();
    r.N = N();
    r.A = a_;
    r.B = b_;
    r.gamma = gamma_;
    r.c = c_;
    r.f = f_;
    r.K = k_;
    r.coercivity_override = coercivity_.overridden;
    return r;
  }

 private:
  friend ProblemInstance validate_instance(const RawInstance& raw);
  ProblemInstance() = default;

  Matrix a_;
  std::vector<Matrix> b_;
  Vector gamma_;
  Vector c_;
  Vector f_;
  Matrix k_;
  Matrix kma_;
  Eigen::LLT<Matrix> kma_llt_;
  double kma_margin_ = 0.0;
  CoercivityCheck coercivity_;
};

namespace detail {

inline double quartic_leading(const std::vector<Matrix>& b, const Vector& gamma, const Vector& u) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double q = 0.5 * u.dot(b[j] * u);
    s += gamma(static_cast<Eigen::Index>(j)) * q * q;
  }
  return s;
}

/// Samples at least 1000 n unit directions. The coordinate axes and the
/// pairwise diagonals are always included so that exactly degenerate
/// structured cases (a shared null direction) are hit.
inline CoercivityCheck sphere_coercivity(int n, const std::vector<Matrix>& b, const Vector& gamma) {
  std::vector<Vector> dirs;
  for (int i = 0; i < n; ++i) dirs.push_back(Vector::Unit(n, i));
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      Vector u = Vector::Zero(n);
      u(i) = 1.0;
      u(k) = 1.0;
      dirs.push_back(u.normalized());
      u(k) = -1.0;
      dirs.push_back(u.normalized());
    }
  }
  const std::size_t total = std::max<std::size_t>(dirs.size(), 1000u * static_cast<std::size_t>(n));
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (dirs.size() < total) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u(i) = normal(rng);
    const double norm = u.norm();
    if (norm > 0.0) dirs.push_back(u / norm);
  }

  CoercivityCheck check;
  check.directions = static_cast<int>(dirs.size());
  check.min_leading_value = std::numeric_limits<double>::infinity();
  for (const Vector& u : dirs) {
    check.min_leading_value = std::min(check.min_leading_value, quartic_leading(b, gamma, u));
  }
  check.passed = check.min_leading_value > 0.0;
  return check;
}

}  // namespace detail

inline ProblemInstance validate_instance(const RawInstance& raw) {
  if (raw.n <= 0) throw Error(ErrorCode::dimension_mismatch, "n must be positive");
  if (raw.N <= 0) throw Error(ErrorCode::dimension_mismatch, "N must be positive");
  const int n = raw.n;
  require_square(raw.A, n, "A");
  require_square(raw.K, n, "K");
  require_size(static_cast<Eigen::Index>(raw.B.size()), raw.N, "B");
  for (const Matrix& bj : raw.B) require_square(bj, n, "B_j");
  require_size(raw.gamma.size(), raw.N, "gamma");
  require_size(raw.c.size(), raw.N, "c");
  require_size(raw.f.size(), n, "f");

  if (!is_symmetric(raw.A)) throw Error(ErrorCode::asymmetric_matrix, "A is not symmetric");
  if (!is_symmetric(raw.K)) throw Error(ErrorCode::asymmetric_matrix, "K is not symmetric");
  for (int j = 0; j < raw.N; ++j) {
    if (!is_symmetric(raw.B[static_cast<std::size_t>(j)])) {
      throw Error(ErrorCode::asymmetric_matrix, "B_" + std::to_string(j + 1) + " is not symmetric");
    }
  }
  for (int j = 0; j < raw.N; ++j) {
    if (!(raw.gamma(j) > 0.0)) {
      throw Error(ErrorCode::nonpositive_gamma,
                  "gamma_" + std::to_string(j + 1) + " = " + std::to_string(raw.gamma(j)));
    }
  }

  const Matrix kma = raw.K - raw.A;
  const Definiteness pd = positive_definite(kma);
  if (!pd.holds) {
    throw Error(ErrorCode::k_minus_a_not_pd,
                "smallest eigenvalue of K - A is " + std::to_string(pd.margin));
  }

  CoercivityCheck coercivity = detail::sphere_coercivity(n, raw.B, raw.gamma);
  coercivity.overridden = raw.coercivity_override;
  if (!coercivity.passed && !raw.coercivity_override) {
    throw Error(ErrorCode::coercivity_failed,
                "quartic leading term vanishes on a sampled direction (min " +
                    std::to_string(coercivity.min_leading_value) + ")");
  }

  ProblemInstance p;
  p.a_ = raw.A;
  p.k_ = raw.K;
  p.b_ = raw.B;
  p.gamma_ = raw.gamma;
  p.c_ = raw.c;
  p.f_ = raw.f;
  p.kma_ = p.k_ - p.a_;
  p.kma_llt_.compute(p.kma_);
  p.kma_margin_ = pd.margin;
  p.coercivity_ = coercivity;
  return p;
}

/// q_j(x) = x'B_j x / 2 for every j.
inline Vector quadratic_forms(const ProblemInstance& p, const Vector& x) {
  Vector q(p.N());
  for (int j = 0; j < p.N(); ++j) q(j) = 0.5 * x.dot(p.B(j) * x);
  return q;
}

/// (v0*)_j(x) = gamma_j (x'B_j x/2 + c_j).
inline Vector lift_multipliers(const ProblemInstance& p, const Vector& x) {
  require_size(x.size(), p.n(), "x");
  return p.gamma().cwiseProduct(quadratic_forms(p, x) + p.c());
}

/// sum_j (v0*)_j B_j
inline Matrix weighted_b_sum(const ProblemInstance& p, const Vector& v0) {
  Matrix s = Matrix::Zero(p.n(), p.n());
  for (int j = 0; j < p.N(); ++j) s += v0(j) * p.B(j);
  return s;
}

/// M(v0*) = sum_j (v0*)_j B_j + K.
inline Matrix dual_metric(const ProblemInstance& p, const Vector& v0) {
  require_size(v0.size(), p.N(), "v0*");
  return weighted_b_sum(p, v0) + p.K();
}

inline double primal_value(const ProblemInstance& p, const Vector& x) {
  require_size(x.size(), p.n(), "x");
  const Vector w = quadratic_forms(p, x) + p.c();
  return 0.5 * x.dot(p.A() * x) + 0.5 * p.gamma().dot(w.cwiseProduct(w)) + p.f().dot(x);
}

inline Vector primal_gradient(const ProblemInstance& p, const Vector& x) {
  require_size(x.size(), p.n(), "x");
  const Vector v0 = lift_multipliers(p, x);
  Vector g = p.A() * x + p.f();
  for (int j = 0; j < p.N(); ++j) g += v0(j) * (p.B(j) * x);
  return g;
}

/// A + sum_j gamma_j (x'B_j x/2 + c_j) B_j + sum_j gamma_j (B_j x)(B_j x)'.
inline Matrix primal_hessian(const ProblemInstance& p, const Vector& x) {
  require_size(x.size(), p.n(), "x");
  const Vector v0 = lift_multipliers(p, x);
  Matrix h = p.A();
  for (int j = 0; j < p.N(); ++j) {
    const Vector bx = p.B(j) * x;
    h += v0(j) * p.B(j) + p.gamma()(j) * (bx * bx.transpose());
  }
  return 0.5 * (h + h.transpose());
}

inline double g1_value(const ProblemInstance& p, const Vector& x) {
  require_size(x.size(), p.n(), "x");
  return 0.5 * x.dot(p.K_minus_A() * x) - p.f().dot(x);
}

inline double g2_value(const ProblemInstance& p, const Vector& x, const Vector& v) {
  require_size(x.size(), p.n(), "x");
  require_size(v.size(), p.N(), "v");
  const Vector w = quadratic_forms(p, x) + p.c() + v;
  return 0.5 * p.gamma().dot(w.cwiseProduct(w)) + 0.5 * x.dot(p.K() * x);
}

}  // namespace dcdual

#endif  // DCDUAL_PROBLEM_HPP
