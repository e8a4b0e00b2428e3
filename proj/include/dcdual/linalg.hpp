// Dense linear-algebra vocabulary shared by every dcdual module.

#ifndef DCDUAL_LINALG_HPP
#define DCDUAL_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace dcdual {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Failure categories. The string form is what reports and the CLI print.
enum class ErrorCode {
  dimension_mismatch,
  asymmetric_matrix,
  nonpositive_gamma,
  k_minus_a_not_pd,
  coercivity_failed,
  outside_c_star,
  no_convergence,
  left_c_star,
  a_star_empty,
  degenerate_critical_point,
  not_converged_pair,
  probe_failure,
  not_case2,
  singular_matrix,
  parse_error,
  out_of_range,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::asymmetric_matrix: return "asymmetric-matrix";
    case ErrorCode::nonpositive_gamma: return "nonpositive-gamma";
    case ErrorCode::k_minus_a_not_pd: return "K-minus-A-not-PD";
    case ErrorCode::coercivity_failed: return "coercivity-heuristic-failed";
    case ErrorCode::outside_c_star: return "outside-C-star";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::left_c_star: return "left-C-star";
    case ErrorCode::a_star_empty: return "A-star-empty-near-init";
    case ErrorCode::degenerate_critical_point: return "degenerate-critical-point";
    case ErrorCode::not_converged_pair: return "not-converged-pair";
    case ErrorCode::probe_failure: return "probe-failure";
    case ErrorCode::not_case2: return "not-case2";
    case ErrorCode::singular_matrix: return "singular-matrix";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::out_of_range: return "out-of-range";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + " has length " +
                                                   std::to_string(got) + ", expected " +
                                                   std::to_string(want));
  }
}

inline void require_square(const Matrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + " is " +
                                                   std::to_string(m.rows()) + "x" +
                                                   std::to_string(m.cols()) + ", expected " +
                                                   std::to_string(n) + "x" + std::to_string(n));
  }
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool is_symmetric(const Matrix& m) {
  return max_abs(m - m.transpose()) <= 1e-12 * (1.0 + max_abs(m));
}

/// Smallest and largest eigenvalue of the symmetric part of m.
inline std::pair<double, double> eigen_range(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

/// Result of a positive-definiteness test: the smallest eigenvalue is the margin.
struct Definiteness {
  double margin = 0.0;     // smallest eigenvalue
  double tolerance = 0.0;  // eps_pd used in the comparison
  bool holds = false;
};

/// A > 0 iff lambda_min > 1e-10 * (1 + max |lambda|).
inline Definiteness positive_definite(const Matrix& m) {
  auto [lo, hi] = eigen_range(m);
  Definiteness d;
  d.margin = lo;
  d.tolerance = 1e-10 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  d.holds = lo > d.tolerance;
  return d;
}

/// A < 0, reported through the largest eigenvalue (margin is -lambda_max).
inline Definiteness negative_definite(const Matrix& m) {
  auto [lo, hi] = eigen_range(m);
  Definiteness d;
  d.margin = -hi;
  d.tolerance = 1e-10 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  d.holds = -hi > d.tolerance;
  return d;
}

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;

  bool operator==(const Inertia&) const = default;
};

inline Inertia inertia(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double tol = 1e-10 * (1.0 + ev.cwiseAbs().maxCoeff());
  Inertia in;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) {
      ++in.positive;
    } else if (ev(i) < -tol) {
      ++in.negative;
    } else {
      ++in.zero;
    }
  }
  return in;
}

/// Inverse of a symmetric positive-definite matrix; throws if Cholesky fails.
inline Matrix spd_inverse(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_matrix, "Cholesky factorization failed");
  }
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

/// 2-norm condition number from the singular values; +inf when singular.
inline double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

/// ||got - want||_F / max(||got||_F, ||want||_F); zero when both vanish.
inline double relative_frobenius(const Matrix& got, const Matrix& want) {
  const double scale = std::max(got.norm(), want.norm());
  return scale > 0.0 ? (got - want).norm() / scale : 0.0;
}

inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace dcdual

#endif  // DCDUAL_LINALG_HPP
