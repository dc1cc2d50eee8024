// Orthonormal polynomial bases on the reference triangle {(0,0),(1,0),(0,1)}
// and the reference interval [0,1]. The triangle basis is the Koornwinder
// family (collapsed-coordinate Jacobi products), the interval basis shifted
// Legendre, both evaluated by three-term recurrences and normalized in
// closed form, so orthonormality holds to machine precision at any degree.
// Functions are ordered by total degree; the degree-d basis is the leading
// block of every higher-degree basis. Basis objects are immutable and
// cached per degree.

#pragma once

#include <projhdg/quadrature.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace projhdg {

namespace detail {

constexpr int kMaxBasisDegree = 10;

}  // namespace detail

// Orthonormal basis of P_degree on the reference triangle,
// dim = (degree+1)(degree+2)/2. Member (p, q) is
//   N_pq (1-y)^p P_p(xi) P_q^{(2p+1,0)}(2y-1),  xi = (2x+y-1)/(1-y),
// with N_pq = sqrt(2 (2p+1) (p+q+1)); the (1-y)^p P_p(xi) factor is a
// polynomial evaluated by a scaled Legendre recurrence, so no collapsed
// coordinate is ever formed.
class CellBasis {
 public:
  explicit CellBasis(int degree) : degree_(degree) {
    if (degree < 0 || degree > detail::kMaxBasisDegree)
      throw std::invalid_argument("CellBasis: degree out of range");
    dim_ = (degree + 1) * (degree + 2) / 2;
  }

  int degree() const { return degree_; }
  int dim() const { return dim_; }

  // eval(pts)(p, i) = value of basis function i at row p of pts (npts x 2).
  Eigen::MatrixXd eval(const Eigen::MatrixXd& pts) const {
    const int np = static_cast<int>(pts.rows());
    Eigen::MatrixXd val(np, dim_);
    Workspace w(degree_);
    for (int p = 0; p < np; ++p) {
      evaluate(pts(p, 0), pts(p, 1), w);
      val.row(p) = w.val;
    }
    return val;
  }

  // Gradients with respect to the reference coordinates.
  void eval_grad(const Eigen::MatrixXd& pts, Eigen::MatrixXd& dx,
                 Eigen::MatrixXd& dy) const {
    const int np = static_cast<int>(pts.rows());
    dx.resize(np, dim_);
    dy.resize(np, dim_);
    Workspace w(degree_);
    for (int p = 0; p < np; ++p) {
      evaluate(pts(p, 0), pts(p, 1), w);
      dx.row(p) = w.dx;
      dy.row(p) = w.dy;
    }
  }

  Eigen::VectorXd eval_point(double x, double y) const {
    Workspace w(degree_);
    evaluate(x, y, w);
    return w.val.transpose();
  }

 private:
  struct Workspace {
    explicit Workspace(int degree) {
      const int dim = (degree + 1) * (degree + 2) / 2;
      val.resize(dim);
      dx.resize(dim);
      dy.resize(dim);
      r.resize(degree + 1);
      rx.resize(degree + 1);
      ry.resize(degree + 1);
    }
    Eigen::RowVectorXd val, dx, dy;
    Eigen::VectorXd r, rx, ry;
  };

  // Fills w.val/dx/dy with all basis values and reference gradients at
  // (x, y), ordered by total degree t and, within t, by p descending.
  void evaluate(double x, double y, Workspace& w) const {
    const int d = degree_;
    const double s = 1.0 - y;         // (1-y), the Legendre scale
    const double z = 2.0 * x + y - 1.0;
    const double s2 = s * s;
    const double u = 2.0 * y - 1.0;   // Jacobi argument

    // r[p] = (1-y)^p P_p(z/s) with d/dx, d/dy:
    //   (n+1) r_{n+1} = (2n+1) z r_n - n s^2 r_{n-1}.
    w.r(0) = 1.0;
    w.rx(0) = 0.0;
    w.ry(0) = 0.0;
    if (d >= 1) {
      w.r(1) = z;
      w.rx(1) = 2.0;
      w.ry(1) = 1.0;
    }
    for (int n = 1; n < d; ++n) {
      const double c1 = 2.0 * n + 1.0, c2 = n, c3 = n + 1.0;
      w.r(n + 1) = (c1 * z * w.r(n) - c2 * s2 * w.r(n - 1)) / c3;
      w.rx(n + 1) =
          (c1 * (2.0 * w.r(n) + z * w.rx(n)) - c2 * s2 * w.rx(n - 1)) / c3;
      w.ry(n + 1) = (c1 * (w.r(n) + z * w.ry(n)) -
                     c2 * (-2.0 * s * w.r(n - 1) + s2 * w.ry(n - 1))) /
                    c3;
    }

    // For each p: J_q = P_q^{(alpha,0)}(u), alpha = 2p+1, with dJ/du, and
    // the normalized product. Index of (p, q): graded by t = p+q.
    for (int p = 0; p <= d; ++p) {
      const double alpha = 2.0 * p + 1.0;
      double jm2 = 0.0, jm2d = 0.0;
      double jm1 = 1.0, jm1d = 0.0;
      for (int q = 0; q <= d - p; ++q) {
        double jq, jqd;
        if (q == 0) {
          jq = 1.0;
          jqd = 0.0;
        } else if (q == 1) {
          jq = ((alpha + 2.0) * u + alpha) / 2.0;
          jqd = (alpha + 2.0) / 2.0;
        } else {
          const double n = q;
          const double A = 2.0 * n * (n + alpha) * (2.0 * n + alpha - 2.0);
          const double B =
              (2.0 * n + alpha - 1.0) * (2.0 * n + alpha) * (2.0 * n + alpha - 2.0);
          const double Cc = (2.0 * n + alpha - 1.0) * alpha * alpha;
          const double D =
              2.0 * (n + alpha - 1.0) * (n - 1.0) * (2.0 * n + alpha);
          jq = ((B * u + Cc) * jm1 - D * jm2) / A;
          jqd = (B * jm1 + (B * u + Cc) * jm1d - D * jm2d) / A;
        }
        const int t = p + q;
        // Within total degree t, p runs down from t; (p, q) sits at offset
        // (t - p) from the start of the degree-t block.
        const int idx = t * (t + 1) / 2 + (t - p);
        const double N = std::sqrt(2.0 * (2.0 * p + 1.0) * (p + q + 1.0));
        w.val(idx) = N * w.r(p) * jq;
        w.dx(idx) = N * w.rx(p) * jq;
        w.dy(idx) = N * (w.ry(p) * jq + w.r(p) * 2.0 * jqd);
        jm2 = jm1;
        jm2d = jm1d;
        jm1 = jq;
        jm1d = jqd;
      }
    }
  }

  int degree_;
  int dim_;
};

// Orthonormal basis of P_degree on [0,1], dim = degree+1: shifted Legendre
// sqrt(2j+1) P_j(2t-1).
class FaceBasis {
 public:
  explicit FaceBasis(int degree) : degree_(degree) {
    if (degree < 0 || degree > detail::kMaxBasisDegree)
      throw std::invalid_argument("FaceBasis: degree out of range");
    dim_ = degree + 1;
  }

  int degree() const { return degree_; }
  int dim() const { return dim_; }

  Eigen::MatrixXd eval(const Eigen::VectorXd& ts) const {
    const int np = static_cast<int>(ts.size());
    Eigen::MatrixXd val(np, dim_);
    for (int p = 0; p < np; ++p) {
      const double u = 2.0 * ts(p) - 1.0;
      double pm1 = 0.0, pn = 1.0;
      for (int j = 0; j < dim_; ++j) {
        val(p, j) = std::sqrt(2.0 * j + 1.0) * pn;
        const double pnext = ((2.0 * j + 1.0) * u * pn - j * pm1) / (j + 1.0);
        pm1 = pn;
        pn = pnext;
      }
    }
    return val;
  }

  Eigen::VectorXd eval_point(double t) const {
    Eigen::VectorXd v(1);
    v << t;
    return eval(v).row(0);
  }

 private:
  int degree_;
  int dim_;
};

// Cached shared instances; construction is idempotent so the cache is an
// optimization only.
inline const CellBasis& cell_basis(int degree) {
  static std::map<int, CellBasis> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, CellBasis(degree)).first;
  return it->second;
}

inline const FaceBasis& face_basis(int degree) {
  static std::map<int, FaceBasis> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, FaceBasis(degree)).first;
  return it->second;
}

namespace detail {

// Values and reference gradients of the degree-d cell basis at the nodes of
// the triangle rule with the given exactness. Shared across all cells.
struct CellTab {
  const QuadRule* rule;
  Eigen::MatrixXd val, dx, dy;
};

inline const CellTab& cell_tab(int degree, int exactness) {
  static std::map<std::pair<int, int>, CellTab> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  const auto key = std::make_pair(degree, exactness);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const QuadRule& rule = cached_triangle_rule(exactness);
    const CellBasis& basis = cell_basis(degree);
    CellTab tab;
    tab.rule = &rule;
    tab.val = basis.eval(rule.points);
    basis.eval_grad(rule.points, tab.dx, tab.dy);
    it = cache.emplace(key, std::move(tab)).first;
  }
  return it->second;
}

// Face-basis values at the nodes of the interval rule with the given
// exactness.
struct FaceTab {
  const QuadRule* rule;
  Eigen::MatrixXd val;
};

inline const FaceTab& face_tab(int degree, int exactness) {
  static std::map<std::pair<int, int>, FaceTab> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  const auto key = std::make_pair(degree, exactness);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const QuadRule& rule = cached_interval_rule(exactness);
    FaceTab tab;
    tab.rule = &rule;
    tab.val = face_basis(degree).eval(rule.points.col(0));
    it = cache.emplace(key, std::move(tab)).first;
  }
  return it->second;
}

// Cell-basis values along one reference edge, parameterized by the face
// coordinate t of the interval rule. local_edge e joins reference vertices
// e and (e+1)%3; flipped reverses the traversal. Shared across all cells
// since the mesh is an affine family.
inline const Eigen::MatrixXd& trace_tab(int degree, int exactness,
                                        int local_edge, bool flipped) {
  static std::map<std::tuple<int, int, int, bool>, Eigen::MatrixXd> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  const auto key = std::make_tuple(degree, exactness, local_edge, flipped);
  auto it = cache.find(key);
  if (it == cache.end()) {
    static const double verts[3][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    const int a = flipped ? (local_edge + 1) % 3 : local_edge;
    const int b = flipped ? local_edge : (local_edge + 1) % 3;
    const QuadRule& rule = cached_interval_rule(exactness);
    const int np = rule.size();
    Eigen::MatrixXd pts(np, 2);
    for (int p = 0; p < np; ++p) {
      const double t = rule.points(p, 0);
      pts(p, 0) = verts[a][0] + t * (verts[b][0] - verts[a][0]);
      pts(p, 1) = verts[a][1] + t * (verts[b][1] - verts[a][1]);
    }
    it = cache.emplace(key, cell_basis(degree).eval(pts)).first;
  }
  return it->second;
}

}  // namespace detail

}  // namespace projhdg
