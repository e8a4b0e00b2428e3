// The canonical dual functional used in the triality literature, exposed in
// its negated form
//
//   -J1*(v0*) = f'S^{-1}f/2 + sum_p (v0*_p)^2/(2 gamma_p) - sum_p c_p v0*_p,
//   S(v0*)    = sum_p v0*_p B_p + A,
//
// together with an inertia comparison of its Hessian against d2J(x0).
//
// The reconstructed point y = S^{-1} f enters only through quadratic forms,
// so the sign it carries relative to the primal stationarity equation
// (x0 = -S^{-1} f) does not matter here.

#ifndef DCDUAL_BASELINE_HPP
#define DCDUAL_BASELINE_HPP

#include "dcdual/critical.hpp"

namespace dcdual {

namespace detail {

inline Eigen::FullPivLU<Matrix> factor_baseline(const ProblemInstance& p, const Vector& v0) {
  require_size(v0.size(), p.N(), "v0*");
  const Matrix s = p.A() + weighted_b_sum(p, v0);
  // Pivot thresholds are relative to the largest pivot, which never flags a
  // 1x1 round-off residue; measure against the scale of the summands instead.
  double scale = max_abs(p.A());
  for (int j = 0; j < p.N(); ++j) scale += std::abs(v0(j)) * max_abs(p.B(j));
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().cwiseAbs().minCoeff() <= 1e-12 * (1.0 + scale)) {
    throw Error(ErrorCode::singular_matrix, "A + sum_p v0*_p B_p is singular");
  }
  return Eigen::FullPivLU<Matrix>(s);
}

}  // namespace detail

inline double j1_star_value(const ProblemInstance& p, const Vector& v0) {
  const auto lu = detail::factor_baseline(p, v0);
  const Vector y = lu.solve(p.f());
  return 0.5 * p.f().dot(y) + 0.5 * v0.cwiseProduct(v0).cwiseQuotient(p.gamma()).sum() - p.c().dot(v0);
}

/// Component j: -y'B_j y/2 + v0*_j/gamma_j - c_j with y = S^{-1} f.
inline Vector j1_star_gradient(const ProblemInstance& p, const Vector& v0) {
  const auto lu = detail::factor_baseline(p, v0);
  const Vector y = lu.solve(p.f());
  return -quadratic_forms(p, y) + v0.cwiseQuotient(p.gamma()) - p.c();
}

/// Entry (j, k): y'B_j S^{-1} B_k y + delta(j, k)/gamma_j.
inline Matrix j1_star_hessian(const ProblemInstance& p, const Vector& v0) {
  const auto lu = detail::factor_baseline(p, v0);
  const Vector y = lu.solve(p.f());
  Matrix by(p.n(), p.N());
  for (int j = 0; j < p.N(); ++j) by.col(j) = p.B(j) * y;
  Matrix h = by.transpose() * lu.solve(by);
  h = 0.5 * (h + h.transpose());
  h.diagonal() += p.gamma().cwiseInverse();
  return h;
}

struct BaselineReport {
  Vector v0_star;
  double minus_j1_value = 0.0;
  Vector minus_j1_gradient;
  Matrix minus_j1_hessian;
  Inertia primal_hessian_inertia;
  Inertia baseline_hessian_inertia;
  bool correspondence = false;   // both PD or both ND
  double s_margin = 0.0;         // lambda_min(A + sum v0^_p B_p)
  bool scalar_pd_case = false;   // n = N = 1 with A + v0^ B > 0
  bool scalar_agreement = true;  // meaningful only when scalar_pd_case
};

inline bool definite_same_sign(const Inertia& a, const Inertia& b, int na, int nb) {
  const bool both_pd = a.positive == na && b.positive == nb;
  const bool both_nd = a.negative == na && b.negative == nb;
  return both_pd || both_nd;
}

inline BaselineReport correspondence_report(const ProblemInstance& p, const CriticalPair& pair) {
  BaselineReport r;
  r.v0_star = pair.v0_hat;
  r.minus_j1_value = j1_star_value(p, pair.v0_hat);
  r.minus_j1_gradient = j1_star_gradient(p, pair.v0_hat);
  r.minus_j1_hessian = j1_star_hessian(p, pair.v0_hat);
  r.primal_hessian_inertia = inertia(primal_hessian(p, pair.x0));
  r.baseline_hessian_inertia = inertia(r.minus_j1_hessian);
  r.correspondence = definite_same_sign(r.primal_hessian_inertia, r.baseline_hessian_inertia, p.n(), p.N());
  const Definiteness s = positive_definite(p.A() + weighted_b_sum(p, pair.v0_hat));
  r.s_margin = s.margin;
  r.scalar_pd_case = p.n() == 1 && p.N() == 1 && s.holds;
  if (r.scalar_pd_case) r.scalar_agreement = r.correspondence;
  return r;
}

}  // namespace dcdual

#endif  // DCDUAL_BASELINE_HPP
