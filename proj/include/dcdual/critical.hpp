// Primal critical points of J and their lift to dual critical points.

#ifndef DCDUAL_CRITICAL_HPP
#define DCDUAL_CRITICAL_HPP

#include "dcdual/conjugate.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace dcdual {

struct PrimalSolve {
  Vector x;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  // infinity norm at x
};

inline double primal_tolerance(const Vector& x) { return 1e-12 * (1.0 + inf_norm(x)); }

/// Damped Newton on grad J = 0 with halving on |grad J|. Finds minima,
/// saddles and maxima alike. Near-singular Hessians get a Tikhonov shift
/// of 1e-8 (1 + |H|).
inline PrimalSolve solve_primal_critical(const ProblemInstance& p, const Vector& x_init, int max_iterations = 200) {
  require_size(x_init.size(), p.n(), "x_init");
  PrimalSolve out;
  Vector x = x_init;
  Vector g = primal_gradient(p, x);
  for (int it = 0; it <= max_iterations; ++it) {
    out.x = x;
    out.iterations = it;
    out.gradient_norm = inf_norm(g);
    if (!std::isfinite(out.gradient_norm)) break;
    if (out.gradient_norm <= primal_tolerance(x)) {
      out.converged = true;
      break;
    }
    if (it == max_iterations) break;

    const Matrix h = primal_hessian(p, x);
    Eigen::LDLT<Matrix> ldlt(h);
    Vector step;
    if (ldlt.info() == Eigen::Success && ldlt.rcond() > 1e-14) {
      step = -ldlt.solve(g);
    } else {
      const double shift = 1e-8 * (1.0 + h.norm());
      step = -(h + shift * Matrix::Identity(p.n(), p.n())).ldlt().solve(g);
    }

    double t = 1.0;
    bool accepted = false;
    const double g_norm = g.norm();
    for (int half = 0; half < 60; ++half, t *= 0.5) {
      const Vector trial = x + t * step;
      const Vector tg = primal_gradient(p, trial);
      if (tg.norm() < g_norm) {
        x = trial;
        g = tg;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return out;
}

struct MultistartResult {
  std::vector<Vector> points;  // distinct converged critical points, sorted by J
  int dropped = 0;             // starts that did not converge
};

/// Deterministic multistart from centered Gaussian starts with scale
/// 1 + |f| / (1 + lambda_min(K - A)).
inline MultistartResult multistart(const ProblemInstance& p, int n_seeds, std::uint64_t rng_seed) {
  MultistartResult out;
  if (n_seeds <= 0) return out;
  const double scale = 1.0 + p.f().norm() / (1.0 + p.k_minus_a_margin());
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, scale);

  std::vector<Vector> found;
  for (int s = 0; s < n_seeds; ++s) {
    Vector x0(p.n());
    for (int i = 0; i < p.n(); ++i) x0(i) = normal(rng);
    const PrimalSolve solve = solve_primal_critical(p, x0);
    if (!solve.converged) {
      ++out.dropped;
      continue;
    }
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Vector& y) {
      return inf_norm(y - solve.x) <= 1e-6;
    });
    if (!duplicate) found.push_back(solve.x);
  }

  std::vector<std::pair<double, Vector>> keyed;
  keyed.reserve(found.size());
  for (Vector& x : found) keyed.emplace_back(primal_value(p, x), std::move(x));
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return std::lexicographical_compare(a.second.data(), a.second.data() + a.second.size(), b.second.data(),
                                        b.second.data() + b.second.size());
  });
  for (auto& [value, x] : keyed) out.points.push_back(std::move(x));
  return out;
}

/// A primal critical point together with its dual image
///   v0^_j = gamma_j (x0'B_j x0/2 + c_j),   v^ = sum_j v0^_j B_j x0 + K x0.
struct CriticalPair {
  Vector x0;
  Vector v_hat;
  Vector v0_hat;
  double primal_residual = 0.0;      // |grad J(x0)|_inf
  double dual_residual_vstar = std::numeric_limits<double>::quiet_NaN();
  double dual_residual_v0 = std::numeric_limits<double>::quiet_NaN();
  int newton_iterations = 0;
  Membership c_star;
  Membership b_star;
  double lift_identity_residual = 0.0;  // |-A x0 + K x0 - f - v^|_inf
  bool lift_identity_checked = false;

  bool converged(double tol = 1e-9) const { return primal_residual <= tol; }
  bool in_a_star() const { return c_star.holds && b_star.holds; }
};

/// (K - A)^{-1}(v* + f).
inline Vector recover_primal(const ProblemInstance& p, const Vector& v_star) {
  require_size(v_star.size(), p.n(), "v*");
  return p.solve_k_minus_a(v_star + p.f());
}

struct DualStationarity {
  double r_vstar = 0.0;  // |(K - A)^{-1}(v^ + f) - M(v0^)^{-1} v^|_inf
  double r_v0 = 0.0;     // max_j |-v0^_j/gamma_j + x0'B_j x0/2 + c_j|
};

inline DualStationarity dual_stationarity_residual(const ProblemInstance& p, const Vector& x0, const Vector& v_hat,
                                                   const Vector& v0_hat) {
  require_size(x0.size(), p.n(), "x0");
  require_size(v_hat.size(), p.n(), "v*");
  const Eigen::LLT<Matrix> llt = detail::factor_in_c_star(p, v0_hat);
  DualStationarity r;
  r.r_vstar = inf_norm(recover_primal(p, v_hat) - llt.solve(v_hat));
  r.r_v0 = inf_norm(-v0_hat.cwiseQuotient(p.gamma()) + quadratic_forms(p, x0) + p.c());
  return r;
}

inline DualStationarity dual_stationarity_residual(const ProblemInstance& p, const CriticalPair& pair) {
  return dual_stationarity_residual(p, pair.x0, pair.v_hat, pair.v0_hat);
}

inline CriticalPair lift_to_dual(const ProblemInstance& p, const Vector& x0, int newton_iterations = 0) {
  require_size(x0.size(), p.n(), "x0");
  CriticalPair pair;
  pair.x0 = x0;
  pair.v0_hat = lift_multipliers(p, x0);
  pair.v_hat = weighted_b_sum(p, pair.v0_hat) * x0 + p.K() * x0;
  pair.primal_residual = inf_norm(primal_gradient(p, x0));
  pair.newton_iterations = newton_iterations;
  pair.c_star = in_C_star(p, pair.v0_hat);
  pair.b_star = in_B_star(p, pair.v0_hat);
  pair.lift_identity_residual = inf_norm(p.K_minus_A() * x0 - p.f() - pair.v_hat);
  pair.lift_identity_checked = pair.primal_residual <= 1e-10;
  if (pair.c_star.holds) {
    const DualStationarity r = dual_stationarity_residual(p, pair);
    pair.dual_residual_vstar = r.r_vstar;
    pair.dual_residual_v0 = r.r_v0;
  }
  return pair;
}

}  // namespace dcdual

#endif  // DCDUAL_CRITICAL_HPP
