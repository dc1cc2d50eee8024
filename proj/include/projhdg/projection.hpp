// Elementwise and facewise L2 projections onto the orthonormal pullback
// bases, plus the facet-projection residual functional
//   R(v, w) = sum_K <(I - P_M) v.n_K, w>_{dK}.
//
// Coefficients are taken with respect to the reference basis composed with
// the inverse affine map, so the cell Gram matrix is det(J) times the
// identity and projection reduces to reference-domain quadrature sums.
// Face fields may be double valued; face projections carry a side tag.

#pragma once

#include <projhdg/basis.hpp>
#include <projhdg/mesh.hpp>
#include <projhdg/quadrature.hpp>

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace projhdg {

using ScalarField = std::function<double(const Eigen::Vector2d&)>;
using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
// Side-aware fields for quantities that are double valued on faces; the
// second argument is the cell the trace is taken from.
using SidedScalarField = std::function<double(const Eigen::Vector2d&, int)>;
using SidedVectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&, int)>;

struct ProjectedField {
  enum class Entity { Cell, Face };

  Entity entity = Entity::Cell;
  int index = -1;                // cell or face id
  int degree = 0;
  int side = -1;                 // face projections: cell the trace came from
  Eigen::VectorXd coeffs;

  // Point evaluation; faces take the parameter t in [0,1] of the global
  // face parameterization.
  double eval(const Eigen::Vector2d& xhat_or_t) const {
    if (entity == Entity::Cell)
      return cell_basis(degree).eval_point(xhat_or_t.x(), xhat_or_t.y()).dot(coeffs);
    return face_basis(degree).eval_point(xhat_or_t.x()).dot(coeffs);
  }
};

inline int default_exactness(int degree) { return 2 * degree + 3; }

// L2(K) projection of f onto P_degree(K). With the pullback basis the
// normal equations collapse to c_i = int_ref f(F_K(xhat)) phi_i(xhat) dxhat.
inline ProjectedField project_cell(const Mesh& mesh, int cell, int degree,
                                   const ScalarField& f, int exactness = -1) {
  if (exactness < 0) exactness = default_exactness(degree);
  const auto& tab = detail::cell_tab(degree, exactness);
  const CellGeom geom = cell_geom(mesh, cell);
  const int np = tab.rule->size();
  Eigen::VectorXd fw(np);
  for (int p = 0; p < np; ++p) {
    const Eigen::Vector2d x =
        geom.map(tab.rule->points.row(p).transpose());
    fw(p) = tab.rule->weights(p) * f(x);
  }
  ProjectedField pf;
  pf.entity = ProjectedField::Entity::Cell;
  pf.index = cell;
  pf.degree = degree;
  pf.coeffs = tab.val.transpose() * fw;
  return pf;
}

// Componentwise projection of a vector field; coefficients stacked as
// [x-component block; y-component block], the flux layout used throughout.
inline Eigen::VectorXd project_cell_vector(const Mesh& mesh, int cell,
                                           int degree, const VectorField& f,
                                           int exactness = -1) {
  if (exactness < 0) exactness = default_exactness(degree);
  const auto& tab = detail::cell_tab(degree, exactness);
  const CellGeom geom = cell_geom(mesh, cell);
  const int np = tab.rule->size();
  const int dim = static_cast<int>(tab.val.cols());
  Eigen::VectorXd fxw(np), fyw(np);
  for (int p = 0; p < np; ++p) {
    const Eigen::Vector2d x =
        geom.map(tab.rule->points.row(p).transpose());
    const Eigen::Vector2d v = f(x);
    fxw(p) = tab.rule->weights(p) * v.x();
    fyw(p) = tab.rule->weights(p) * v.y();
  }
  Eigen::VectorXd c(2 * dim);
  c.head(dim) = tab.val.transpose() * fxw;
  c.tail(dim) = tab.val.transpose() * fyw;
  return c;
}

// L2(F) projection of the trace from the given side onto P_degree(F).
inline ProjectedField project_face(const Mesh& mesh, int face, int degree,
                                   const SidedScalarField& f, int side,
                                   int exactness = -1) {
  if (exactness < 0) exactness = default_exactness(degree);
  const auto& tab = detail::face_tab(degree, exactness);
  const int np = tab.rule->size();
  Eigen::VectorXd fw(np);
  for (int p = 0; p < np; ++p) {
    const Eigen::Vector2d x = face_point(mesh, face, tab.rule->points(p, 0));
    fw(p) = tab.rule->weights(p) * f(x, side);
  }
  ProjectedField pf;
  pf.entity = ProjectedField::Entity::Face;
  pf.index = face;
  pf.degree = degree;
  pf.side = side;
  pf.coeffs = tab.val.transpose() * fw;
  return pf;
}

inline ProjectedField project_face(const Mesh& mesh, int face, int degree,
                                   const ScalarField& f, int exactness = -1) {
  return project_face(
      mesh, face, degree,
      [&f](const Eigen::Vector2d& x, int) { return f(x); }, -1, exactness);
}

// R(v, w) = sum over cells K and faces F of K of
// int_F ((v.n_K) - P_M(v.n_K)) w ds, with P_M the degree-k face projection
// taken side by side. Both fields are evaluated from side K.
inline double residual_R(const Mesh& mesh, int k, const SidedVectorField& v,
                         const SidedScalarField& w, int exactness) {
  const auto& tab = detail::face_tab(k, exactness);
  const int np = tab.rule->size();
  double total = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    for (int e = 0; e < 3; ++e) {
      const int fid = mesh.cell_faces(cell, e);
      const Face& f = mesh.faces[fid];
      const Eigen::Vector2d n = mesh.sign(cell, fid) * f.normal;
      Eigen::VectorXd vn(np), wv(np);
      for (int p = 0; p < np; ++p) {
        const Eigen::Vector2d x = face_point(mesh, fid, tab.rule->points(p, 0));
        vn(p) = v(x, cell).dot(n);
        wv(p) = w(x, cell);
      }
      const Eigen::VectorXd coeffs =
          tab.val.transpose() * (tab.rule->weights.asDiagonal() * vn);
      const Eigen::VectorXd defect = vn - tab.val * coeffs;
      total += f.length * tab.rule->weights.dot(
                              (defect.array() * wv.array()).matrix());
    }
  }
  return total;
}

}  // namespace projhdg
