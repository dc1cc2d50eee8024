// Gaussian quadrature on the reference interval [0,1] and the reference
// triangle {(0,0),(1,0),(0,1)}. Rules are built by the Golub-Welsch
// eigenvalue method; the triangle rule is a collapsed tensor product
// (Duffy transform) with a Gauss-Jacobi rule absorbing the Jacobian.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace projhdg {

struct QuadRule {
  // points(i, c): coordinate c of node i. One column for interval rules,
  // two columns for triangle rules.
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

namespace detail {

// Nodes/weights for the weight function w on [-1,1] given the monic
// three-term recurrence p_{n+1} = (x - a_n) p_n - b_n p_{n-1} and
// mu0 = integral of w. Symmetric tridiagonal eigenproblem (Golub-Welsch).
inline void golub_welsch(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         double mu0, Eigen::VectorXd& nodes,
                         Eigen::VectorXd& weights) {
  const int m = static_cast<int>(a.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    J(i, i) = a(i);
    if (i + 1 < m) {
      const double off = std::sqrt(b(i + 1));
      J(i, i + 1) = off;
      J(i + 1, i) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("quadrature: eigensolver failed");
  nodes = es.eigenvalues();
  weights.resize(m);
  for (int i = 0; i < m; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = mu0 * v0 * v0;
  }
}

// Gauss-Legendre on [-1,1], m points, exact through degree 2m-1.
inline void gauss_legendre(int m, Eigen::VectorXd& nodes,
                           Eigen::VectorXd& weights) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int n = 1; n < m; ++n)
    b(n) = static_cast<double>(n) * n / (4.0 * n * n - 1.0);
  golub_welsch(a, b, 2.0, nodes, weights);
}

// Gauss-Jacobi for weight (1-x) on [-1,1], m points, exact through 2m-1.
inline void gauss_jacobi10(int m, Eigen::VectorXd& nodes,
                           Eigen::VectorXd& weights) {
  Eigen::VectorXd a(m), b(m);
  b(0) = 0.0;
  for (int n = 0; n < m; ++n)
    a(n) = -1.0 / ((2.0 * n + 1.0) * (2.0 * n + 3.0));
  for (int n = 1; n < m; ++n)
    b(n) = static_cast<double>(n) * (n + 1.0) /
           ((2.0 * n + 1.0) * (2.0 * n + 1.0));
  golub_welsch(a, b, 2.0, nodes, weights);
}

inline int points_for_exactness(int e) { return e / 2 + 1; }

}  // namespace detail

// Rule on [0,1] integrating polynomials of degree <= exactness with
// ceil((exactness+1)/2) points.
inline QuadRule interval_rule(int exactness) {
  if (exactness < 0) throw std::invalid_argument("interval_rule: exactness < 0");
  const int m = detail::points_for_exactness(exactness);
  Eigen::VectorXd x, w;
  detail::gauss_legendre(m, x, w);
  QuadRule rule;
  rule.points.resize(m, 1);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    rule.points(i, 0) = 0.5 * (x(i) + 1.0);
    rule.weights(i) = 0.5 * w(i);
  }
  rule.exactness = exactness;
  return rule;
}

// Rule on the reference triangle, exact for total degree <= exactness.
// Duffy map x = u(1-v), y = v sends [0,1]^2 to the triangle with Jacobian
// (1-v); the v direction uses Gauss-Jacobi with that weight built in, so
// all nodes are strictly interior and all weights positive.
inline QuadRule triangle_rule(int exactness) {
  if (exactness < 0) throw std::invalid_argument("triangle_rule: exactness < 0");
  const int m = detail::points_for_exactness(exactness);
  Eigen::VectorXd xu, wu, xv, wv;
  detail::gauss_legendre(m, xu, wu);
  detail::gauss_jacobi10(m, xv, wv);
  QuadRule rule;
  rule.points.resize(m * m, 2);
  rule.weights.resize(m * m);
  int idx = 0;
  for (int j = 0; j < m; ++j) {
    const double v = 0.5 * (xv(j) + 1.0);
    const double wj = 0.25 * wv(j);
    for (int i = 0; i < m; ++i, ++idx) {
      const double u = 0.5 * (xu(i) + 1.0);
      rule.points(idx, 0) = u * (1.0 - v);
      rule.points(idx, 1) = v;
      rule.weights(idx) = 0.5 * wu(i) * wj;
    }
  }
  rule.exactness = exactness;
  return rule;
}

namespace detail {

// Cached rules: basis construction and assembly request the same handful of
// exactness levels repeatedly.
inline const QuadRule& cached_interval_rule(int exactness) {
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(exactness);
  if (it == cache.end())
    it = cache.emplace(exactness, interval_rule(exactness)).first;
  return it->second;
}

inline const QuadRule& cached_triangle_rule(int exactness) {
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(exactness);
  if (it == cache.end())
    it = cache.emplace(exactness, triangle_rule(exactness)).first;
  return it->second;
}

}  // namespace detail

}  // namespace projhdg
