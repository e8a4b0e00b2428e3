// Independent reference computations for the test suite. Nothing here calls
// into the library's solvers; values are recomputed from raw instance data
// with plain loops, finite differences, grids and bisection.

#ifndef DCDUAL_TESTS_ORACLES_HPP
#define DCDUAL_TESTS_ORACLES_HPP

#include "dcdual/dcdual.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using dcdual::Matrix;
using dcdual::RawInstance;
using dcdual::Vector;

inline RawInstance scalar_instance(double a, double b, double gamma, double c, double f, double k) {
  RawInstance r;
  r.n = 1;
  r.N = 1;
  r.A = Matrix::Constant(1, 1, a);
  r.B = {Matrix::Constant(1, 1, b)};
  r.gamma = Vector::Constant(1, gamma);
  r.c = Vector::Constant(1, c);
  r.f = Vector::Constant(1, f);
  r.set_scalar_k(k);
  return r;
}

inline RawInstance p_tri() { return scalar_instance(-1.0, 1.0, 1.0, 0.0, 0.0, 1.0); }
inline RawInstance p_min() { return scalar_instance(1.0, 1.0, 1.0, 1.0, 0.0, 2.0); }

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline double quad(const Matrix& m, const Vector& x, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) s += x(i) * m(i, k) * y(k);
  }
  return s;
}

/// J(x) summed term by term.
inline double primal(const RawInstance& r, const Vector& x) {
  double s = 0.5 * quad(r.A, x, x);
  for (int j = 0; j < r.N; ++j) {
    const double w = 0.5 * quad(r.B[static_cast<std::size_t>(j)], x, x) + r.c(j);
    s += 0.5 * r.gamma(j) * w * w;
  }
  for (int i = 0; i < r.n; ++i) s += r.f(i) * x(i);
  return s;
}

inline double g1(const RawInstance& r, const Vector& x) {
  double s = -0.5 * quad(r.A, x, x) + 0.5 * quad(r.K, x, x);
  for (int i = 0; i < r.n; ++i) s -= r.f(i) * x(i);
  return s;
}

inline double g2(const RawInstance& r, const Vector& x, const Vector& v) {
  double s = 0.5 * quad(r.K, x, x);
  for (int j = 0; j < r.N; ++j) {
    const double w = 0.5 * quad(r.B[static_cast<std::size_t>(j)], x, x) + r.c(j) + v(j);
    s += 0.5 * r.gamma(j) * w * w;
  }
  return s;
}

/// Central differences with step h (1 + |x_i|).
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * (1.0 + std::abs(x(i)));
    Vector xp = x;
    Vector xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

/// Jacobian of a vector field by central differences, column i = d g / d x_i.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& g, const Vector& x, double h = 1e-5) {
  const Vector g0 = g(x);
  Matrix jac(g0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * (1.0 + std::abs(x(i)));
    Vector xp = x;
    Vector xm = x;
    xp(i) += step;
    xm(i) -= step;
    jac.col(i) = (g(xp) - g(xm)) / (2.0 * step);
  }
  return jac;
}

inline double rel_inf(const Vector& got, const Vector& want) {
  const double scale = std::max({1.0, got.cwiseAbs().maxCoeff(), want.cwiseAbs().maxCoeff()});
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline double rel_fro(const Matrix& got, const Matrix& want) {
  const double scale = std::max({1.0, got.norm(), want.norm()});
  return (got - want).norm() / scale;
}

/// Maximum of a function on a box by repeated grid refinement: evaluate a
/// `points`-per-axis grid, recentre on the best node, shrink by `shrink`.
/// Intended for concave objectives, where it converges to the supremum.
inline double grid_sup(const std::function<double(const Vector&)>& f, Vector center, double half_width,
                       int points = 41, int rounds = 30, double shrink = 0.25, Vector* argmax = nullptr) {
  const int dim = static_cast<int>(center.size());
  double best = -std::numeric_limits<double>::infinity();
  Vector best_x = center;
  for (int round = 0; round < rounds; ++round) {
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
      Vector x(dim);
      for (int d = 0; d < dim; ++d) {
        x(d) = center(d) - half_width + 2.0 * half_width * idx[static_cast<std::size_t>(d)] / (points - 1);
      }
      const double v = f(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
      int d = 0;
      while (d < dim && ++idx[static_cast<std::size_t>(d)] == points) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == dim) break;
    }
    center = best_x;
    half_width *= shrink * 2.0;
  }
  if (argmax != nullptr) *argmax = best_x;
  return best;
}

/// All roots of a continuous scalar function on [lo, hi], found from sign
/// changes on a uniform grid (plus exact zeros at grid nodes) and refined by
/// bisection.
inline std::vector<double> bisection_roots(const std::function<double(double)>& g, double lo, double hi,
                                           int cells = 20000) {
  std::vector<double> roots;
  double x0 = lo;
  double g0 = g(x0);
  for (int i = 1; i <= cells; ++i) {
    const double x1 = lo + (hi - lo) * i / cells;
    const double g1v = g(x1);
    if (g0 == 0.0) {
      roots.push_back(x0);
    } else if ((g0 < 0.0) != (g1v < 0.0) && g1v != 0.0) {
      double a = x0;
      double b = x1;
      double ga = g0;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if (gm == 0.0) {
          a = b = m;
          break;
        }
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    g0 = g1v;
  }
  return roots;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double lambda_min(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline Matrix metric(const RawInstance& r, const Vector& v0) {
  Matrix m = r.K;
  for (int j = 0; j < r.N; ++j) m += v0(j) * r.B[static_cast<std::size_t>(j)];
  return m;
}

/// sup_x { v*'x - G1(x) } on a box around the origin large enough to contain
/// the maximizer, using the bound |x| <= (|v*| + |f|) / lambda_min(K - A).
inline double g1_star_grid(const RawInstance& r, const Vector& v_star) {
  const double lam = lambda_min(r.K - r.A);
  const double radius = 2.0 * (v_star.norm() + r.f.norm()) / lam + 1.0;
  auto obj = [&](const Vector& x) { return v_star.dot(x) - g1(r, x); };
  return grid_sup(obj, Vector::Zero(r.n), radius);
}

/// sup_{x, v} { v*'x + v0*'v - G2(x, v) }. The inner sup over v is separable
/// and one-dimensional per component; each is taken on its own grid.
inline double g2_star_grid(const RawInstance& r, const Vector& v_star, const Vector& v0) {
  const double lam = lambda_min(metric(r, v0));
  const double radius = 2.0 * v_star.norm() / lam + 1.0;
  auto inner = [&](const Vector& x) {
    double s = v_star.dot(x) - 0.5 * quad(r.K, x, x);
    for (int j = 0; j < r.N; ++j) {
      const double q = 0.5 * quad(r.B[static_cast<std::size_t>(j)], x, x) + r.c(j);
      // sup_v { v0 v - gamma/2 (q + v)^2 }, maximizer near v = v0/gamma - q.
      const double centre = v0(j) / r.gamma(j) - q;
      auto one = [&](const Vector& v) {
        const double w = q + v(0);
        return v0(j) * v(0) - 0.5 * r.gamma(j) * w * w;
      };
      s += grid_sup(one, Vector::Constant(1, centre), 4.0 * (1.0 + std::abs(centre)), 21, 25);
    }
    return s;
  };
  return grid_sup(inner, Vector::Zero(r.n), radius, 21, 22);
}

/// J*(v*, v0*) from its closed form, computed here with dense solves.
inline double j_star_closed(const RawInstance& r, const Vector& v_star, const Vector& v0) {
  const Vector w = v_star + r.f;
  const double g1s = 0.5 * w.dot((r.K - r.A).ldlt().solve(w));
  double tail = 0.0;
  for (int j = 0; j < r.N; ++j) tail += v0(j) * v0(j) / (2.0 * r.gamma(j)) - r.c(j) * v0(j);
  const double g2s = 0.5 * v_star.dot(metric(r, v0).ldlt().solve(v_star)) + tail;
  return g1s - g2s;
}

/// sup over C* of J*(v*, .), by grid refinement. Points outside C* score -inf.
inline double j_tilde_grid(const RawInstance& r, const Vector& v_star, const Vector& center, double half_width,
                           Vector* argmax = nullptr) {
  auto obj = [&](const Vector& v0) {
    if (lambda_min(metric(r, v0)) <= 0.0) return -std::numeric_limits<double>::infinity();
    return j_star_closed(r, v_star, v0);
  };
  return grid_sup(obj, center, half_width, r.N == 1 ? 201 : 61, 30, 0.25, argmax);
}

/// Random small instance used by property tests; K - A is kept PD with a
/// margin drawn in [0.2, 1.2].
inline RawInstance random_raw(std::mt19937_64& rng, int n, int N) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sym = [&]() {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) g(i, k) = normal(rng);
    }
    return Matrix(0.5 * (g + g.transpose()));
  };
  RawInstance r;
  r.n = n;
  r.N = N;
  r.A = sym();
  for (int j = 0; j < N; ++j) r.B.push_back(sym());
  r.gamma.resize(N);
  r.c.resize(N);
  for (int j = 0; j < N; ++j) {
    r.gamma(j) = 0.5 + 1.5 * unit(rng);
    r.c(j) = 2.0 * unit(rng) - 1.0;
  }
  r.f.resize(n);
  for (int i = 0; i < n; ++i) r.f(i) = normal(rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(r.A, Eigen::EigenvaluesOnly);
  r.set_scalar_k(es.eigenvalues()(n - 1) + 0.2 + unit(rng));
  return r;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace oracle

#endif  // DCDUAL_TESTS_ORACLES_HPP
