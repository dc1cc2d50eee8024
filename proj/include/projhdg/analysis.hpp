// Error measurement for discrete solutions: elementwise L2 errors of the
// flux and scalar variables, the scaled facet jump norm
//   || h^{-1/2} (P_M u_h - uhat_h) ||_{boundary of the triangulation},
// and observed convergence orders between consecutive meshes.

#pragma once

#include <projhdg/basis.hpp>
#include <projhdg/hdg.hpp>
#include <projhdg/mesh.hpp>
#include <projhdg/projection.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace projhdg {

inline double error_q_l2(const Mesh& mesh, const DiscretizationConfig& cfg,
                         const Solution& sol, const VectorField& q_exact,
                         int exactness = -1) {
  const int ex = exactness >= 0 ? exactness : cfg.effective_exactness();
  const detail::CellTab& vt = detail::cell_tab(cfg.deg_v(), ex);
  const int np = vt.rule->size();
  const int dim = static_cast<int>(vt.val.cols());
  double total = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const CellGeom geom = cell_geom(mesh, cell);
    const Eigen::VectorXd qx = vt.val * sol.q[cell].head(dim);
    const Eigen::VectorXd qy = vt.val * sol.q[cell].tail(dim);
    double acc = 0.0;
    for (int p = 0; p < np; ++p) {
      const Eigen::Vector2d x = geom.map(vt.rule->points.row(p).transpose());
      const Eigen::Vector2d d = q_exact(x) - Eigen::Vector2d(qx(p), qy(p));
      acc += vt.rule->weights(p) * d.squaredNorm();
    }
    total += geom.detJ * acc;
  }
  return std::sqrt(total);
}

inline double error_u_l2(const Mesh& mesh, const DiscretizationConfig& cfg,
                         const Solution& sol, const ScalarField& u_exact,
                         int exactness = -1) {
  const int ex = exactness >= 0 ? exactness : cfg.effective_exactness();
  const detail::CellTab& wt = detail::cell_tab(cfg.deg_w(), ex);
  const int np = wt.rule->size();
  double total = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const CellGeom geom = cell_geom(mesh, cell);
    const Eigen::VectorXd uh = wt.val * sol.u[cell];
    double acc = 0.0;
    for (int p = 0; p < np; ++p) {
      const Eigen::Vector2d x = geom.map(wt.rule->points.row(p).transpose());
      const double d = u_exact(x) - uh(p);
      acc += wt.rule->weights(p) * d * d;
    }
    total += geom.detJ * acc;
  }
  return std::sqrt(total);
}

// Facet jump of the recovered solution against its own trace unknown,
// scaled by h^{-1/2}; interior faces contribute from both sides.
inline double jump_norm(const Mesh& mesh, const DiscretizationConfig& cfg,
                        const Solution& sol) {
  const int m = cfg.k + 1;
  double total = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const detail::CellOps ops = detail::build_cell_ops(mesh, cell, cfg);
    for (int e = 0; e < 3; ++e) {
      const detail::FaceOps& fo = ops.face[e];
      const Eigen::VectorXd jump =
          fo.RW.topRows(m) * sol.u[cell] - sol.uhat[fo.fid];
      total += fo.length * jump.squaredNorm();
    }
  }
  return std::sqrt(total / mesh.h_global);
}

struct ErrorReport {
  double err_q = 0.0;
  double err_u = 0.0;
  double err_jump = 0.0;
};

inline ErrorReport compute_errors(const Mesh& mesh,
                                  const DiscretizationConfig& cfg,
                                  const Solution& sol,
                                  const ScalarField& u_exact,
                                  const VectorField& q_exact) {
  ErrorReport rep;
  rep.err_q = error_q_l2(mesh, cfg, sol, q_exact);
  rep.err_u = error_u_l2(mesh, cfg, sol, u_exact);
  rep.err_jump = jump_norm(mesh, cfg, sol);
  return rep;
}

// Observed order log(e1/e2) / log(h1/h2) between two refinement levels.
inline double observed_order(double e1, double h1, double e2, double h2) {
  if (!(e1 > 0.0) || !(e2 > 0.0))
    throw std::invalid_argument("observed_order: errors must be positive");
  if (!(h1 > 0.0) || !(h2 > 0.0) || h1 == h2)
    throw std::invalid_argument("observed_order: mesh sizes must differ");
  return std::log(e1 / e2) / std::log(h1 / h2);
}

}  // namespace projhdg
