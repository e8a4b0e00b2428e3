// Closed-form conjugates of the two convex pieces, the dual feasibility sets
// C*, B*, A* and the dual functionals J*, J~* and J2*.
//
//   G1*(v*)      = (v* + f)'(K - A)^{-1}(v* + f) / 2
//   G2*(v*, v0*) = v*' M(v0*)^{-1} v* / 2 + sum_j (v0*_j)^2 / (2 gamma_j) - sum_j c_j v0*_j
//   M(v0*)       = sum_j v0*_j B_j + K
//   J*(v*, v0*)  = G1*(v*) - G2*(v*, v0*)
//
// The G2* formula is only the conjugate on C* = {v0* : M(v0*) > 0}; outside
// it the supremum is +inf, so every entry point refuses such points.

#ifndef DCDUAL_CONJUGATE_HPP
#define DCDUAL_CONJUGATE_HPP

#include "dcdual/problem.hpp"

#include <optional>
#include <random>
#include <vector>

namespace dcdual {

struct Membership {
  bool holds = false;
  double margin = 0.0;  // governing smallest eigenvalue
};

inline Membership in_C_star(const ProblemInstance& p, const Vector& v0) {
  const Definiteness d = positive_definite(dual_metric(p, v0));
  return {d.holds, d.margin};
}

inline Membership in_B_star(const ProblemInstance& p, const Vector& v0) {
  require_size(v0.size(), p.N(), "v0*");
  const Definiteness d = positive_definite(p.A() + weighted_b_sum(p, v0));
  return {d.holds, d.margin};
}

/// A* = B* intersect C*; the margin is the smaller of the two.
inline Membership in_A_star(const ProblemInstance& p, const Vector& v0) {
  const Membership b = in_B_star(p, v0);
  const Membership c = in_C_star(p, v0);
  return {b.holds && c.holds, std::min(b.margin, c.margin)};
}

struct DualPoint {
  Vector v_star;
  Vector v0_star;
  Membership c_star;  // M(v0*) > 0
  Membership b_star;  // A + sum_j v0*_j B_j > 0

  bool in_a_star() const { return c_star.holds && b_star.holds; }
};

inline DualPoint make_dual_point(const ProblemInstance& p, Vector v_star, Vector v0_star) {
  require_size(v_star.size(), p.n(), "v*");
  require_size(v0_star.size(), p.N(), "v0*");
  DualPoint d;
  d.c_star = in_C_star(p, v0_star);
  d.b_star = in_B_star(p, v0_star);
  d.v_star = std::move(v_star);
  d.v0_star = std::move(v0_star);
  return d;
}

inline double g1_star(const ProblemInstance& p, const Vector& v_star) {
  require_size(v_star.size(), p.n(), "v*");
  const Vector w = v_star + p.f();
  return 0.5 * w.dot(p.solve_k_minus_a(w));
}

namespace detail {

/// Cholesky of M(v0*) after confirming v0* in C*.
inline Eigen::LLT<Matrix> factor_in_c_star(const ProblemInstance& p, const Vector& v0) {
  const Matrix m = dual_metric(p, v0);
  const Definiteness d = positive_definite(m);
  if (!d.holds) {
    throw Error(ErrorCode::outside_c_star,
                "lambda_min(M(v0*)) = " + std::to_string(d.margin) + " <= " + std::to_string(d.tolerance));
  }
  return Eigen::LLT<Matrix>(m);
}

inline double g2_star_tail(const ProblemInstance& p, const Vector& v0) {
  return 0.5 * v0.cwiseProduct(v0).cwiseQuotient(p.gamma()).sum() - p.c().dot(v0);
}

}  // namespace detail

inline double g2_star(const ProblemInstance& p, const Vector& v_star, const Vector& v0_star) {
  require_size(v_star.size(), p.n(), "v*");
  const Eigen::LLT<Matrix> llt = detail::factor_in_c_star(p, v0_star);
  return 0.5 * v_star.dot(llt.solve(v_star)) + detail::g2_star_tail(p, v0_star);
}

inline double g2_star(const ProblemInstance& p, const DualPoint& d) { return g2_star(p, d.v_star, d.v0_star); }

inline double j_star(const ProblemInstance& p, const Vector& v_star, const Vector& v0_star) {
  return g1_star(p, v_star) - g2_star(p, v_star, v0_star);
}

inline double j_star(const ProblemInstance& p, const DualPoint& d) { return j_star(p, d.v_star, d.v0_star); }

/// Gradient of J*(v*, .) in v0*: x'B_l x/2 - v0*_l/gamma_l + c_l with x = M^{-1} v*.
inline Vector j_star_v0_gradient(const ProblemInstance& p, const Vector& v_star, const Vector& v0_star) {
  const Eigen::LLT<Matrix> llt = detail::factor_in_c_star(p, v0_star);
  const Vector x = llt.solve(v_star);
  return quadratic_forms(p, x) - v0_star.cwiseQuotient(p.gamma()) + p.c();
}

/// Result of the inner maximization over v0*.
struct InnerMax {
  double value = 0.0;  // J*(v*, argmax)
  Vector v0_star;      // argmax
  double residual = 0.0;
  int iterations = 0;
  double c_star_margin = 0.0;
  double b_star_margin = 0.0;
  bool boundary_attained = false;  // J2* only
  bool barrier_path = false;       // J2* only: value from the barrier path, within n * 1e-6 of the sup in exact arithmetic
};

namespace detail {

struct NewtonOutcome {
  bool converged = false;
  bool left_c_star = false;
  Vector v0;
  double residual = 0.0;
  int iterations = 0;
};

inline double inner_tolerance(const Vector& v0) { return 1e-12 * (1.0 + inf_norm(v0)); }

/// Residual of the inner stationarity system; empty optional when v0 leaves C*.
inline std::optional<Vector> inner_residual(const ProblemInstance& p, const Vector& v_star, const Vector& v0,
                                            Eigen::LLT<Matrix>* llt_out = nullptr, Vector* x_out = nullptr) {
  Eigen::LLT<Matrix> llt(dual_metric(p, v0));
  if (llt.info() != Eigen::Success) return std::nullopt;
  Vector x = llt.solve(v_star);
  Vector g = quadratic_forms(p, x) - v0.cwiseQuotient(p.gamma()) + p.c();
  if (llt_out != nullptr) *llt_out = std::move(llt);
  if (x_out != nullptr) *x_out = std::move(x);
  return g;
}

/// E(l, eta) = x'B_l M^{-1} B_eta x + delta(l, eta)/gamma_l, the negated v0*-Hessian of J*.
inline Matrix inner_curvature(const ProblemInstance& p, const Eigen::LLT<Matrix>& llt, const Vector& x) {
  const int nn = p.N();
  Matrix bx(p.n(), nn);
  for (int j = 0; j < nn; ++j) bx.col(j) = p.B(j) * x;
  Matrix e = bx.transpose() * llt.solve(bx);
  e.diagonal() += p.gamma().cwiseInverse();
  return 0.5 * (e + e.transpose());
}

/// Damped Newton on the concave inner problem with halving on the residual norm.
inline NewtonOutcome inner_newton(const ProblemInstance& p, const Vector& v_star, Vector v0) {
  NewtonOutcome out;
  Eigen::LLT<Matrix> llt;
  Vector x;
  std::optional<Vector> g = inner_residual(p, v_star, v0, &llt, &x);
  if (!g) {
    out.left_c_star = true;
    out.v0 = v0;
    return out;
  }
  for (int it = 0; it <= 100; ++it) {
    out.iterations = it;
    const double r = inf_norm(*g);
    out.residual = r;
    out.v0 = v0;
    if (r <= inner_tolerance(v0)) {
      out.converged = true;
      return out;
    }
    if (it == 100) break;
    const Matrix e = inner_curvature(p, llt, x);
    const Vector step = e.ldlt().solve(*g);
    double t = 1.0;
    bool accepted = false;
    bool any_inside = false;
    for (int half = 0; half < 60; ++half, t *= 0.5) {
      const Vector trial = v0 + t * step;
      Eigen::LLT<Matrix> trial_llt;
      Vector trial_x;
      std::optional<Vector> tg = inner_residual(p, v_star, trial, &trial_llt, &trial_x);
      if (!tg) continue;
      any_inside = true;
      if (tg->norm() < g->norm()) {
        v0 = trial;
        g = std::move(tg);
        llt = std::move(trial_llt);
        x = std::move(trial_x);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.left_c_star = !any_inside;
      break;
    }
  }
  return out;
}

}  // namespace detail

namespace detail {

/// Ascent on the concave function lambda_min(S(v0)), where S is M(v0*) alone
/// or additionally A + sum v0_j B_j. Returns a point whose margin exceeds a
/// small positive target, or nullopt when the ascent stalls below it.
inline std::optional<Vector> ascend_to_interior(const ProblemInstance& p, Vector v0, bool include_b_star) {
  auto margin_and_grad = [&](const Vector& v, Vector* grad) {
    const Matrix m = dual_metric(p, v);
    Eigen::SelfAdjointEigenSolver<Matrix> em(m);
    double best = em.eigenvalues()(0);
    Vector u = em.eigenvectors().col(0);
    if (include_b_star) {
      Eigen::SelfAdjointEigenSolver<Matrix> eb(p.A() + weighted_b_sum(p, v));
      if (eb.eigenvalues()(0) < best) {
        best = eb.eigenvalues()(0);
        u = eb.eigenvectors().col(0);
      }
    }
    if (grad != nullptr) {
      grad->resize(p.N());
      for (int j = 0; j < p.N(); ++j) (*grad)(j) = u.dot(p.B(j) * u);
    }
    return best;
  };
  const double target = 1e-6 * (1.0 + max_abs(p.A()) + max_abs(p.K()));
  Vector grad;
  double current = margin_and_grad(v0, &grad);
  double step = 1.0 + inf_norm(v0);
  for (int it = 0; it < 400 && current <= target; ++it) {
    if (grad.norm() == 0.0) return std::nullopt;
    bool moved = false;
    for (int half = 0; half < 60; ++half) {
      const Vector trial = v0 + step * grad / grad.norm();
      Vector trial_grad;
      const double m = margin_and_grad(trial, &trial_grad);
      if (m > current) {
        v0 = trial;
        current = m;
        grad = trial_grad;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  if (current > target) return v0;
  return std::nullopt;
}

}  // namespace detail

/// Default inner start: the lift of x0 = (K - A)^{-1}(v* + f).
inline Vector default_inner_init(const ProblemInstance& p, const Vector& v_star) {
  return lift_multipliers(p, p.solve_k_minus_a(v_star + p.f()));
}

/// J~*(v*) = sup over C* of J*(v*, .), evaluated at its interior stationary point.
///
/// J*(v*, .) is strictly concave on C*, so a converged stationary point is the
/// maximizer. The supplied (or default) start is tried first; eight seeded
/// starts are the fallback, and among those the largest J* wins.
inline InnerMax j_tilde_star(const ProblemInstance& p, const Vector& v_star,
                             const std::optional<Vector>& init = std::nullopt) {
  require_size(v_star.size(), p.n(), "v*");
  Vector start = init ? *init : default_inner_init(p, v_star);
  require_size(start.size(), p.N(), "init");
  if (!in_C_star(p, start).holds) {
    if (auto inside = detail::ascend_to_interior(p, start, false)) start = *inside;
  }

  std::vector<detail::NewtonOutcome> outcomes;
  outcomes.push_back(detail::inner_newton(p, v_star, start));
  if (!outcomes.front().converged) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 + inf_norm(start);
    const Vector lifted = default_inner_init(p, v_star);
    for (int s = 0; s < 8; ++s) {
      Vector v0 = (s == 0) ? lifted : start;
      if (s > 0) {
        for (int j = 0; j < p.N(); ++j) v0(j) += scale * normal(rng);
      }
      if (!in_C_star(p, v0).holds) {
        if (auto inside = detail::ascend_to_interior(p, v0, false)) v0 = *inside;
      }
      outcomes.push_back(detail::inner_newton(p, v_star, v0));
    }
  }

  std::optional<InnerMax> best;
  for (const auto& o : outcomes) {
    if (!o.converged) continue;
    const Membership c = in_C_star(p, o.v0);
    if (!c.holds) continue;
    const double value = j_star(p, v_star, o.v0);
    if (!best || value > best->value) {
      InnerMax m;
      m.value = value;
      m.v0_star = o.v0;
      m.residual = o.residual;
      m.iterations = o.iterations;
      m.c_star_margin = c.margin;
      m.b_star_margin = in_B_star(p, o.v0).margin;
      best = std::move(m);
    }
  }
  if (best) return *best;

  bool all_left = true;
  for (const auto& o : outcomes) all_left = all_left && o.left_c_star;
  if (all_left) throw Error(ErrorCode::left_c_star, "inner iterates left C*");
  throw Error(ErrorCode::no_convergence,
              "inner Newton did not converge (residual " + std::to_string(outcomes.front().residual) + ")");
}


/// J2*(v*) = sup over A* of J*(v*, .).
///
/// When the C*-maximizer lies inside A* it is also the A*-maximizer. When it
/// lies on the closure of A* the supremum is its value, tagged
/// boundary-attained. Otherwise a log-det barrier path on B* tracks the
/// constrained maximizer from a feasible start, with the weight shrinking
/// tenfold per stage through 1e-2, 1e-4 and down to 1e-6.
inline InnerMax j2_star(const ProblemInstance& p, const Vector& v_star,
                        const std::optional<Vector>& init = std::nullopt) {
  require_size(v_star.size(), p.n(), "v*");
  std::optional<InnerMax> free_max;
  try {
    free_max = j_tilde_star(p, v_star, init);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_convergence && e.code() != ErrorCode::left_c_star) throw;
  }

  if (free_max) {
    const Definiteness b = positive_definite(p.A() + weighted_b_sum(p, free_max->v0_star));
    if (b.holds) {
      free_max->boundary_attained = b.margin < 1e-6;
      return *free_max;
    }
    if (b.margin >= -b.tolerance) {
      free_max->boundary_attained = true;
      return *free_max;
    }
  }

  const Vector seed = free_max ? free_max->v0_star : (init ? *init : default_inner_init(p, v_star));
  std::optional<Vector> feasible = detail::ascend_to_interior(p, seed, true);
  if (!feasible) throw Error(ErrorCode::a_star_empty, "no point of A* found near the start");

  Vector v0 = *feasible;
  int total_iterations = 0;
  auto barrier_objective = [&](const Vector& v, double mu) -> std::optional<double> {
    Eigen::LLT<Matrix> s(p.A() + weighted_b_sum(p, v));
    Eigen::LLT<Matrix> m(dual_metric(p, v));
    if (s.info() != Eigen::Success || m.info() != Eigen::Success) return std::nullopt;
    const double logdet = 2.0 * Matrix(s.matrixL()).diagonal().array().log().sum();
    const double value = g1_star(p, v_star) - 0.5 * v_star.dot(m.solve(v_star)) - detail::g2_star_tail(p, v);
    return value + mu * logdet;
  };

  auto a_star_margin = [&](const Vector& v) {
    return std::min(eigen_range(p.A() + weighted_b_sum(p, v)).first, eigen_range(dual_metric(p, v)).first);
  };

  // Continuation in mu: the damped Newton phase costs O(objective gap / mu)
  // steps, so the weight starts at the scale of J* and shrinks tenfold per
  // stage down to 1e-6.
  std::vector<double> weights;
  const double scale = 1.0 + std::abs(j_star(p, v_star, v0));
  for (double mu = std::pow(10.0, std::ceil(std::log10(scale))); mu > 1e-2; mu *= 0.1) weights.push_back(mu);
  for (double mu = 1e-2; mu > 5e-7; mu *= 0.1) weights.push_back(mu);

  for (const double mu : weights) {
    for (int it = 0; it < 100; ++it, ++total_iterations) {
      Eigen::LLT<Matrix> m(dual_metric(p, v0));
      const Matrix smat = p.A() + weighted_b_sum(p, v0);
      const Matrix s_inv = spd_inverse(smat);
      const Vector x = m.solve(v_star);
      Vector grad = quadratic_forms(p, x) - v0.cwiseQuotient(p.gamma()) + p.c();
      Matrix hess = -detail::inner_curvature(p, m, x);
      for (int l = 0; l < p.N(); ++l) {
        const Matrix sl = s_inv * p.B(l);
        grad(l) += mu * sl.trace();
        for (int e = 0; e < p.N(); ++e) hess(l, e) -= mu * (sl * s_inv * p.B(e)).trace();
      }
      const Vector step = (-hess).ldlt().solve(grad);
      const double decrement = grad.dot(step);
      const double base = *barrier_objective(v0, mu);
      if (decrement <= 1e-13 * (1.0 + std::abs(base))) break;
      const double floor = 0.1 * a_star_margin(v0);
      double t = 1.0;
      bool accepted = false;
      for (int half = 0; half < 60; ++half, t *= 0.5) {
        const Vector trial = v0 + t * step;
        const std::optional<double> val = barrier_objective(trial, mu);
        if (val && *val >= base + 1e-4 * t * decrement && a_star_margin(trial) >= floor) {
          v0 = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  }

  InnerMax out;
  out.v0_star = v0;
  out.value = j_star(p, v_star, v0);
  out.iterations = total_iterations;
  out.c_star_margin = in_C_star(p, v0).margin;
  out.b_star_margin = in_B_star(p, v0).margin;
  out.residual = inf_norm(j_star_v0_gradient(p, v_star, v0));
  out.barrier_path = true;
  out.boundary_attained = (free_max.has_value()) || std::min(out.b_star_margin, out.c_star_margin) < 1e-6;
  return out;
}

}  // namespace dcdual

#endif  // DCDUAL_CONJUGATE_HPP
