// Second-order chain at a critical pair (x0, v^, v0^).
//
// With M = sum_p v0^_p B_p + K:
//   P1 = [B_1 x0 ... B_N x0]                 (n x N)
//   P2 = P1' M^{-1}                          (N x n)
//   E  = P1' M^{-1} P1 + diag(1/gamma)       (N x N, negated v0*-Hessian of J*)
//   H3 = P1 E^{-1} P2
//   B^ = sum_l gamma_l (B_l x0)(B_l x0)'
//   D  = B^ M^{-1} + I
//   alpha  = (I - H3) D - I
//   alpha1 = -M^{-1} alpha M
//   d2J~*(v^) = -M^{-1} + (K - A)^{-1} + M^{-1} H3
//
// and the identity  d2J~*(v^) D = H1 (d2J(x0) + (K - A) alpha1) H2  with
// H1 = (K - A)^{-1}, H2 = M^{-1}.

#ifndef DCDUAL_CURVATURE_HPP
#define DCDUAL_CURVATURE_HPP

#include "dcdual/critical.hpp"

#include <limits>
#include <string>
#include <vector>

namespace dcdual {

/// Which E matrix to assemble. `derived` differentiates the inner
/// stationarity system and is the one the finite-difference oracle confirms.
/// `statement` is gamma_l x0'B_l M^{-1} B_eta x0 + delta(l, eta), kept for
/// comparison reports only.
enum class EConvention { derived, statement };

inline const char* to_string(EConvention c) { return c == EConvention::derived ? "derived" : "statement"; }

struct CurvatureBundle {
  Matrix M;
  Matrix P1;
  Matrix P2;
  Matrix E;
  Matrix E_bar;
  Matrix H3;
  Matrix B_hat;
  Matrix D;
  Matrix alpha;
  Matrix alpha1;
  Matrix H1;
  Matrix H2;
  Matrix dual_hessian;
  Matrix primal_hessian;  // d2J(x0)
  double e_condition = 0.0;
  double dual_hessian_asymmetry = 0.0;  // max |d2J~* - d2J~*'|, not symmetrized away
  double h1_margin = 0.0;
  double h2_margin = 0.0;
  double d_spectral_margin = 0.0;  // lambda_min of D via its symmetric similarity transform
  EConvention convention = EConvention::derived;
};

inline constexpr double kDegenerateCondition = 1e12;

inline CurvatureBundle build_bundle(const ProblemInstance& p, const CriticalPair& pair,
                                    EConvention convention = EConvention::derived) {
  if (!pair.converged(1e-9)) {
    throw Error(ErrorCode::not_converged_pair, "primal residual " + std::to_string(pair.primal_residual));
  }
  const int n = p.n();
  const int nn = p.N();
  const Matrix identity = Matrix::Identity(n, n);

  CurvatureBundle b;
  b.convention = convention;
  b.M = dual_metric(p, pair.v0_hat);
  const Eigen::LLT<Matrix> m_llt = detail::factor_in_c_star(p, pair.v0_hat);
  b.H2 = m_llt.solve(identity);
  b.H1 = p.k_minus_a_inverse();

  b.P1.resize(n, nn);
  for (int j = 0; j < nn; ++j) b.P1.col(j) = p.B(j) * pair.x0;
  b.P2 = b.P1.transpose() * b.H2;

  b.E = b.P2 * b.P1;
  if (convention == EConvention::derived) {
    b.E.diagonal() += p.gamma().cwiseInverse();
  } else {
    b.E = p.gamma().asDiagonal() * b.E;
    b.E.diagonal().array() += 1.0;
  }
  b.e_condition = condition_number(b.E);
  if (!(b.e_condition <= kDegenerateCondition)) {
    throw Error(ErrorCode::degenerate_critical_point, "cond(E) = " + std::to_string(b.e_condition));
  }
  b.E_bar = b.E.partialPivLu().inverse();
  b.H3 = b.P1 * b.E_bar * b.P2;

  b.B_hat = b.P1 * p.gamma().asDiagonal() * b.P1.transpose();
  b.D = b.B_hat * b.H2 + identity;
  b.alpha = (identity - b.H3) * b.D - identity;
  b.alpha1 = -b.H2 * b.alpha * b.M;
  b.dual_hessian = -b.H2 + b.H1 + b.H2 * b.H3;
  b.dual_hessian_asymmetry = max_abs(b.dual_hessian - b.dual_hessian.transpose());
  b.primal_hessian = primal_hessian(p, pair.x0);

  b.h1_margin = eigen_range(b.H1).first;
  b.h2_margin = eigen_range(b.H2).first;
  // D = B^ L^{-T} L^{-1} + I is similar to L^{-1} B^ L^{-T} + I for M = L L'.
  const Matrix l_inv = Matrix(m_llt.matrixL()).triangularView<Eigen::Lower>().solve(identity);
  b.d_spectral_margin = eigen_range(l_inv * b.B_hat * l_inv.transpose() + identity).first;
  return b;
}

/// d v0^ / d v* = E^{-1} P2 (N x n).
inline Matrix implicit_sensitivity(const CurvatureBundle& bundle) { return bundle.E_bar * bundle.P2; }

/// Relative Frobenius residual of d2J~* D against H1 (d2J(x0) + (K - A) alpha1) H2.
inline double verify_chain_identity(const ProblemInstance& p, const CurvatureBundle& b) {
  const Matrix lhs = b.dual_hessian * b.D;
  const Matrix rhs = b.H1 * (b.primal_hessian + p.K_minus_A() * b.alpha1) * b.H2;
  return relative_frobenius(lhs, rhs);
}

/// Central-difference Hessian of v* -> J~*(v*) around v^, each probe solved
/// independently by the inner Newton solver. Component k uses the step
/// h (1 + |v^_k|). Output is symmetrized.
inline Matrix dual_hessian_fd(const ProblemInstance& p, const CriticalPair& pair, double h) {
  const int n = p.n();
  auto value = [&](const Vector& v) {
    try {
      return j_tilde_star(p, v, pair.v0_hat).value;
    } catch (const Error& e) {
      throw Error(ErrorCode::probe_failure, e.what());
    }
  };
  const Vector& center = pair.v_hat;
  Vector step(n);
  for (int k = 0; k < n; ++k) step(k) = h * (1.0 + std::abs(center(k)));
  const double f0 = value(center);
  Matrix hess(n, n);
  for (int k = 0; k < n; ++k) {
    const Vector dk = step(k) * Vector::Unit(n, k);
    hess(k, k) = (value(center + dk) - 2.0 * f0 + value(center - dk)) / (step(k) * step(k));
    for (int l = k + 1; l < n; ++l) {
      const Vector dl = step(l) * Vector::Unit(n, l);
      const double fpp = value(center + dk + dl);
      const double fpm = value(center + dk - dl);
      const double fmp = value(center - dk + dl);
      const double fmm = value(center - dk - dl);
      hess(k, l) = hess(l, k) = (fpp - fpm - fmp + fmm) / (4.0 * step(k) * step(l));
    }
  }
  return hess;
}

struct FdHessian {
  Matrix hessian;
  double step = 0.0;         // larger of the two relative steps behind the accepted estimate
  double discrepancy = 0.0;  // relative Frobenius change against the next smaller step pair
};

/// Richardson-extrapolated central differences over the eight steps h, h/4, h/16, ...
/// Each pair of neighbouring steps gives (16 H(h/4) - H(h)) / 15, which cancels
/// the h^2 term. The extrapolation that changes least when the steps shrink
/// once more is kept; of the two it is compared with, the larger-step one,
/// since J~* is a difference of two larger conjugates and round-off grows as
/// the step shrinks. Throws probe_failure when no two consecutive
/// extrapolations agree to within `tolerance`.
inline FdHessian dual_hessian_fd_converged(const ProblemInstance& p, const CriticalPair& pair, double h,
                                           double tolerance = 1e-3) {
  std::vector<Matrix> raw;
  std::vector<double> steps;
  for (int i = 0; i < 8; ++i, h *= 0.25) {
    raw.push_back(dual_hessian_fd(p, pair, h));
    steps.push_back(h);
  }
  std::vector<Matrix> extrapolated;
  for (std::size_t i = 0; i + 1 < raw.size(); ++i) extrapolated.push_back((16.0 * raw[i + 1] - raw[i]) / 15.0);

  FdHessian best;
  best.discrepancy = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < extrapolated.size(); ++i) {
    const double d = relative_frobenius(extrapolated[i], extrapolated[i + 1]);
    if (d < best.discrepancy) best = {extrapolated[i], steps[i], d};
  }
  if (!(best.discrepancy <= tolerance)) {
    throw Error(ErrorCode::probe_failure, "finite-difference Hessian did not settle: smallest step-to-step change " +
                                              std::to_string(best.discrepancy));
  }
  return best;
}

}  // namespace dcdual

#endif  // DCDUAL_CURVATURE_HPP
