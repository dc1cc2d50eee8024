// Hybridizable discontinuous Galerkin discretization of the Poisson problem
//   q + grad u = 0,  div q = f  in Omega,  u = g  on the boundary,
// on triangular meshes, with three numerical-flux variants that differ only
// in where the facet L2 projection P_M enters the facet integrals.
//
// Spaces on a cell K with facet degree k and flux enrichment l >= 0:
//   V(K) = [P_{k+l}]^2 (flux q), W(K) = P_{k+1} (scalar u),
//   M(F) = P_k on each face (trace unknown uhat).
// All facet stabilizations use tau = tau_coeff / h.
//
// Writing the first equation as (q,v) + (grad u, v) - <j1, v.n> and the
// stabilization as tau <j2, j2'>, the variants are
//   Std:  j1 = u - uhat          j2 = u - uhat
//   LS:   j1 = u - uhat          j2 = P_M u - uhat   (projected flux)
//   Proj: j1 = P_M u - uhat      j2 = P_M u - uhat   (projection in every
//                                                     facet integral)
// Every variant yields a symmetric positive definite statically condensed
// system on the facet unknowns.
//
// Local block ordering: flux components first (x block then y block), then
// u, then uhat on the cell boundary in local edge order.

#pragma once

#include <projhdg/basis.hpp>
#include <projhdg/mesh.hpp>
#include <projhdg/parallel.hpp>
#include <projhdg/projection.hpp>
#include <projhdg/quadrature.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace projhdg {

enum class MethodVariant { Std, LS, Proj };

inline std::string to_string(MethodVariant v) {
  switch (v) {
    case MethodVariant::Std: return "std";
    case MethodVariant::LS: return "ls";
    case MethodVariant::Proj: return "proj";
  }
  return "?";
}

inline MethodVariant variant_from_string(const std::string& s) {
  if (s == "std") return MethodVariant::Std;
  if (s == "ls") return MethodVariant::LS;
  if (s == "proj") return MethodVariant::Proj;
  throw std::invalid_argument("unknown method variant: " + s);
}

struct DiscretizationConfig {
  MethodVariant variant = MethodVariant::Proj;
  int k = 1;                 // facet degree
  int l = 0;                 // flux enrichment
  double tau_coeff = 1.0;    // tau = tau_coeff / h
  int exactness = -1;        // quadrature exactness; -1 selects the budget

  int deg_v() const { return k + l; }
  int deg_w() const { return k + 1; }
  int deg_m() const { return k; }

  int effective_exactness() const {
    return exactness >= 0 ? exactness : 2 * std::max(k + l, k + 2) + 3;
  }

  void validate() const {
    if (k < 0 || k > 3) throw std::invalid_argument("config: k must be in 0..3");
    if (l < 0 || k + l > 6)
      throw std::invalid_argument("config: need l >= 0 and k+l <= 6");
    if (!(tau_coeff > 0.0))
      throw std::invalid_argument("config: tau coefficient must be positive");
    if (exactness >= 0 && exactness < 2 * std::max(k + l, k + 2))
      throw std::invalid_argument("config: quadrature exactness below minimum");
  }
};

namespace detail {

// Precomputed per-cell integration data. N maps flux coefficients to the
// face-basis coefficients of v.n on a face (n the outward normal of this
// cell); RW does the same for traces of W functions. Faces are represented
// to full trace degree max(k+l, k+1), so the facet projection P_M is a row
// truncation.
struct FaceOps {
  int fid = -1;
  double length = 0.0;
  Eigen::MatrixXd N;    // (dfull+1) x 2 dimV
  Eigen::MatrixXd RW;   // (dfull+1) x dimW
};

struct CellOps {
  double detJ = 0.0;    // = 2 |K|
  int dimV = 0, dimW = 0, m = 0, dfull = 0;
  Eigen::MatrixXd G;    // 2 dimV x dimW, (grad u, v)_K
  FaceOps face[3];
};

inline CellOps build_cell_ops(const Mesh& mesh, int cell,
                              const DiscretizationConfig& cfg) {
  const int degV = cfg.deg_v();
  const int degW = cfg.deg_w();
  const int ex = cfg.effective_exactness();
  const int dfull = std::max(degV, degW);

  CellOps ops;
  ops.m = cfg.k + 1;
  ops.dfull = dfull;

  const CellGeom geom = cell_geom(mesh, cell);
  ops.detJ = geom.detJ;

  const CellTab& vt = cell_tab(degV, ex);
  const CellTab& wt = cell_tab(degW, ex);
  ops.dimV = static_cast<int>(vt.val.cols());
  ops.dimW = static_cast<int>(wt.val.cols());

  // (grad u, v)_K via pullback: grad_x = Jinv^T grad_ref.
  const Eigen::Matrix2d& Ji = geom.Jinv;
  const Eigen::MatrixXd gx = wt.dx * Ji(0, 0) + wt.dy * Ji(1, 0);
  const Eigen::MatrixXd gy = wt.dx * Ji(0, 1) + wt.dy * Ji(1, 1);
  const Eigen::VectorXd cw = ops.detJ * vt.rule->weights;
  ops.G.resize(2 * ops.dimV, ops.dimW);
  ops.G.topRows(ops.dimV) = vt.val.transpose() * cw.asDiagonal() * gx;
  ops.G.bottomRows(ops.dimV) = vt.val.transpose() * cw.asDiagonal() * gy;

  const FaceTab& ft = face_tab(dfull, ex);
  const Eigen::MatrixXd psi_w = ft.rule->weights.asDiagonal() * ft.val;
  for (int e = 0; e < 3; ++e) {
    const int fid = mesh.cell_faces(cell, e);
    const Face& f = mesh.faces[fid];
    const bool flipped = (f.cell_minus == cell && f.edge_minus == e)
                             ? f.flip_minus
                             : f.flip_plus;
    const Eigen::MatrixXd& trV = trace_tab(degV, ex, e, flipped);
    const Eigen::MatrixXd& trW = trace_tab(degW, ex, e, flipped);
    const Eigen::MatrixXd RV = psi_w.transpose() * trV;
    const Eigen::Vector2d n = mesh.sign(cell, fid) * f.normal;
    FaceOps& fo = ops.face[e];
    fo.fid = fid;
    fo.length = f.length;
    fo.RW = psi_w.transpose() * trW;
    fo.N.resize(dfull + 1, 2 * ops.dimV);
    fo.N.leftCols(ops.dimV) = n.x() * RV;
    fo.N.rightCols(ops.dimV) = n.y() * RV;
  }
  return ops;
}

}  // namespace detail

// Local blocks of one cell, in the ordering (q | u, uhat):
//   [ A  B ] [ q ]   [ 0 ]        A: flux mass, 2|K| times identity
//   [ B^T -S ] [ x ] = [ -load ]  S: tau-weighted stabilization, PSD
// with x = (u, uhat on the 3 edges) and load entries only in the u rows.
struct LocalSystem {
  int dimV = 0, dimW = 0, m = 0;
  Eigen::MatrixXd A;      // 2 dimV x 2 dimV
  Eigen::MatrixXd B;      // 2 dimV x (dimW + 3m)
  Eigen::MatrixXd S;      // (dimW + 3m) x (dimW + 3m)
  Eigen::VectorXd load;   // dimW + 3m, nonzero only in the u block
};

inline LocalSystem local_matrices(const Mesh& mesh, int cell,
                                  const DiscretizationConfig& cfg,
                                  const ScalarField& f) {
  const detail::CellOps ops = detail::build_cell_ops(mesh, cell, cfg);
  const double tau = cfg.tau_coeff / mesh.h_global;
  const int dimV = ops.dimV, dimW = ops.dimW, m = ops.m;
  const int nx = dimW + 3 * m;

  LocalSystem loc;
  loc.dimV = dimV;
  loc.dimW = dimW;
  loc.m = m;
  loc.A = ops.detJ * Eigen::MatrixXd::Identity(2 * dimV, 2 * dimV);
  loc.B = Eigen::MatrixXd::Zero(2 * dimV, nx);
  loc.S = Eigen::MatrixXd::Zero(nx, nx);
  loc.B.leftCols(dimW) = ops.G;

  const bool j1_projected = cfg.variant == MethodVariant::Proj;
  const bool j2_projected = cfg.variant != MethodVariant::Std;

  for (int e = 0; e < 3; ++e) {
    const detail::FaceOps& fo = ops.face[e];
    const double L = fo.length;
    // <j1(u, uhat), v.n>: the u coupling, projected for the Proj variant.
    if (j1_projected)
      loc.B.leftCols(dimW) -=
          L * fo.N.topRows(m).transpose() * fo.RW.topRows(m);
    else
      loc.B.leftCols(dimW) -= L * fo.N.transpose() * fo.RW;
    // <uhat, v.n>; uhat coefficients live in the first m face modes.
    loc.B.middleCols(dimW + e * m, m) += L * fo.N.topRows(m).transpose();

    // Stabilization tau <j2(u,uhat), j2(w,mu)>.
    const Eigen::MatrixXd& Zu =
        j2_projected ? fo.RW.topRows(m) : fo.RW;  // j2's u part
    loc.S.topLeftCorner(dimW, dimW) += tau * L * Zu.transpose() * Zu;
    loc.S.block(0, dimW + e * m, dimW, m) -=
        tau * L * fo.RW.topRows(m).transpose();
    loc.S.block(dimW + e * m, 0, m, dimW) -=
        tau * L * fo.RW.topRows(m);
    loc.S.block(dimW + e * m, dimW + e * m, m, m) +=
        tau * L * Eigen::MatrixXd::Identity(m, m);
  }

  // (f, w)_K against the scalar test space.
  const int ex = cfg.effective_exactness();
  const detail::CellTab& wt = detail::cell_tab(cfg.deg_w(), ex);
  const CellGeom geom = cell_geom(mesh, cell);
  const int np = wt.rule->size();
  Eigen::VectorXd fw(np);
  for (int p = 0; p < np; ++p) {
    const Eigen::Vector2d x = geom.map(wt.rule->points.row(p).transpose());
    fw(p) = wt.rule->weights(p) * f(x);
  }
  loc.load = Eigen::VectorXd::Zero(nx);
  loc.load.head(dimW) = ops.detJ * wt.val.transpose() * fw;
  return loc;
}

// Static condensation of one cell onto its facet unknowns, plus the
// recovery operator mapping (uhat on the boundary of K, local load) back to
// the (q, u) coefficients.
struct CondensedLocal {
  Eigen::MatrixXd T;          // 3m x 3m facet block, symmetric PSD
  Eigen::VectorXd g;          // 3m right-hand side contribution
  Eigen::MatrixXd u_of_uhat;  // u = u_const + u_of_uhat * uhat
  Eigen::VectorXd u_const;
  Eigen::MatrixXd q_of_uhat;  // q = q_const + q_of_uhat * uhat
  Eigen::VectorXd q_const;
};

inline CondensedLocal condense_local(const LocalSystem& loc) {
  const int dimW = loc.dimW, m3 = 3 * loc.m;

  const Eigen::LLT<Eigen::MatrixXd> allt(loc.A);
  if (allt.info() != Eigen::Success)
    throw std::runtime_error("condense_local: flux mass block not SPD");
  const Eigen::MatrixXd AinvB = allt.solve(loc.B);

  // Eliminating q gives (B^T A^{-1} B + S) x = load; eliminate u next.
  const Eigen::MatrixXd K = loc.B.transpose() * AinvB + loc.S;
  const Eigen::MatrixXd H = K.topLeftCorner(dimW, dimW);
  const Eigen::MatrixXd C = K.topRightCorner(dimW, m3);
  const Eigen::LLT<Eigen::MatrixXd> hllt(H);
  if (hllt.info() != Eigen::Success)
    throw std::runtime_error(
        "condense_local: singular local block (non-positive tau or "
        "degenerate cell)");
  const Eigen::VectorXd fu = loc.load.head(dimW);
  const Eigen::MatrixXd HinvC = hllt.solve(C);
  const Eigen::VectorXd Hinvf = hllt.solve(fu);

  CondensedLocal cond;
  cond.T = K.bottomRightCorner(m3, m3) - C.transpose() * HinvC;
  cond.g = -C.transpose() * Hinvf;
  cond.u_of_uhat = -HinvC;
  cond.u_const = Hinvf;
  Eigen::MatrixXd xmap = Eigen::MatrixXd::Zero(dimW + m3, m3);
  xmap.topRows(dimW) = cond.u_of_uhat;
  xmap.bottomRows(m3).setIdentity();
  cond.q_of_uhat = -AinvB * xmap;
  Eigen::VectorXd xconst = Eigen::VectorXd::Zero(dimW + m3);
  xconst.head(dimW) = cond.u_const;
  cond.q_const = -AinvB * xconst;

  const double scale = std::max(1e-300, cond.T.cwiseAbs().maxCoeff());
  if ((cond.T - cond.T.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::runtime_error("condense_local: facet block lost symmetry");
  return cond;
}

// Global condensed system on the interior facet unknowns. Dirichlet faces
// carry uhat = P_M g and are folded into the right-hand side.
struct TraceSystem {
  Eigen::SparseMatrix<double> mat;
  Eigen::VectorXd rhs;
  int m = 0;                               // unknowns per face
  std::vector<int> face_dof;               // face -> dof offset, -1 on boundary
  std::vector<Eigen::VectorXd> uhat_bnd;   // boundary faces: P_M g
  double tau = 0.0;
};

inline TraceSystem assemble(const Mesh& mesh, const DiscretizationConfig& cfg,
                            const ScalarField& f, const ScalarField& g) {
  cfg.validate();
  const int m = cfg.k + 1;
  const int ex = cfg.effective_exactness();

  TraceSystem sys;
  sys.m = m;
  sys.tau = cfg.tau_coeff / mesh.h_global;
  sys.face_dof.assign(mesh.num_faces(), -1);
  sys.uhat_bnd.resize(mesh.num_faces());
  int ndof = 0;
  for (int fid = 0; fid < mesh.num_faces(); ++fid) {
    if (mesh.faces[fid].boundary())
      sys.uhat_bnd[fid] = project_face(mesh, fid, cfg.k, g, ex).coeffs;
    else {
      sys.face_dof[fid] = ndof;
      ndof += m;
    }
  }

  const int nc = mesh.num_cells();
  std::vector<CondensedLocal> locals(nc);
  parallel_for(nc, [&](int cell) {
    locals[cell] = condense_local(local_matrices(mesh, cell, cfg, f));
  });

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(nc) * 9 * m * m);
  sys.rhs = Eigen::VectorXd::Zero(ndof);
  for (int cell = 0; cell < nc; ++cell) {
    const CondensedLocal& cond = locals[cell];
    int fids[3], base[3];
    for (int e = 0; e < 3; ++e) {
      fids[e] = mesh.cell_faces(cell, e);
      base[e] = sys.face_dof[fids[e]];
    }
    for (int e = 0; e < 3; ++e) {
      if (base[e] < 0) continue;
      sys.rhs.segment(base[e], m) += cond.g.segment(e * m, m);
      for (int e2 = 0; e2 < 3; ++e2) {
        const auto block = cond.T.block(e * m, e2 * m, m, m);
        if (base[e2] < 0) {
          sys.rhs.segment(base[e], m) -= block * sys.uhat_bnd[fids[e2]];
        } else {
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
              trips.emplace_back(base[e] + i, base[e2] + j, block(i, j));
        }
      }
    }
  }
  sys.mat.resize(ndof, ndof);
  sys.mat.setFromTriplets(trips.begin(), trips.end());

  double scale = 0.0, asym = 0.0;
  const Eigen::SparseMatrix<double> diff =
      Eigen::SparseMatrix<double>(sys.mat.transpose()) - sys.mat;
  for (int c = 0; c < sys.mat.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.mat, c); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  for (int c = 0; c < diff.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it)
      asym = std::max(asym, std::abs(it.value()));
  if (ndof > 0 && asym > 1e-12 * std::max(scale, 1e-300))
    throw std::runtime_error("assemble: trace matrix lost symmetry");
  return sys;
}

// Sparse Cholesky solve of the condensed system.
inline Eigen::VectorXd solve_trace(const TraceSystem& sys) {
  if (sys.mat.rows() == 0) return Eigen::VectorXd();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.mat);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_trace: trace matrix not SPD");
  const Eigen::VectorXd x = llt.solve(sys.rhs);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("solve_trace: back substitution failed");
  const double bnorm = sys.rhs.norm();
  if (bnorm > 0.0) {
    const double res = (sys.mat * x - sys.rhs).norm();
    if (res > 1e-11 * bnorm)
      throw std::runtime_error("solve_trace: residual above tolerance");
  }
  return x;
}

// Discrete solution: per-cell flux and scalar coefficient blocks plus the
// facet coefficients for every face (Dirichlet faces carry P_M g).
struct Solution {
  DiscretizationConfig cfg;
  double tau = 0.0;
  std::vector<Eigen::VectorXd> q;     // 2 dimV per cell, x block then y block
  std::vector<Eigen::VectorXd> u;     // dimW per cell
  std::vector<Eigen::VectorXd> uhat;  // m per face
};

namespace detail {

inline Eigen::VectorXd gather_uhat(const Mesh& mesh, int cell, int m,
                                   const std::vector<Eigen::VectorXd>& uhat) {
  Eigen::VectorXd local(3 * m);
  for (int e = 0; e < 3; ++e)
    local.segment(e * m, m) = uhat[mesh.cell_faces(cell, e)];
  return local;
}

}  // namespace detail

inline Solution solve(const Mesh& mesh, const DiscretizationConfig& cfg,
                      const ScalarField& f, const ScalarField& g) {
  const TraceSystem sys = assemble(mesh, cfg, f, g);
  const Eigen::VectorXd x = solve_trace(sys);

  Solution sol;
  sol.cfg = cfg;
  sol.tau = sys.tau;
  const int m = sys.m;
  sol.uhat.resize(mesh.num_faces());
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    sol.uhat[fid] = mesh.faces[fid].boundary() ? sys.uhat_bnd[fid]
                                               : x.segment(sys.face_dof[fid], m);

  const int nc = mesh.num_cells();
  sol.q.resize(nc);
  sol.u.resize(nc);
  parallel_for(nc, [&](int cell) {
    const CondensedLocal cond =
        condense_local(local_matrices(mesh, cell, cfg, f));
    const Eigen::VectorXd local = detail::gather_uhat(mesh, cell, m, sol.uhat);
    sol.u[cell] = cond.u_const + cond.u_of_uhat * local;
    sol.q[cell] = cond.q_const + cond.q_of_uhat * local;
  });
  return sol;
}

// Unreduced symmetric system over (all q, all u, interior uhat), for use as
// an oracle against the condensed path on small meshes.
struct MonolithicSystem {
  Eigen::MatrixXd mat;
  Eigen::VectorXd rhs;
  int dimV = 0, dimW = 0, m = 0;
  int off_u = 0, off_uhat = 0;
  std::vector<int> face_dof;               // into the uhat block, -1 boundary
  std::vector<Eigen::VectorXd> uhat_bnd;
};

inline MonolithicSystem assemble_monolithic(const Mesh& mesh,
                                            const DiscretizationConfig& cfg,
                                            const ScalarField& f,
                                            const ScalarField& g) {
  cfg.validate();
  if (mesh.num_cells() > 256)
    throw std::invalid_argument(
        "assemble_monolithic: mesh too large for the dense path");
  const int nc = mesh.num_cells();
  const int m = cfg.k + 1;
  const int ex = cfg.effective_exactness();
  const int dimV = cell_basis(cfg.deg_v()).dim();
  const int dimW = cell_basis(cfg.deg_w()).dim();

  MonolithicSystem mono;
  mono.dimV = dimV;
  mono.dimW = dimW;
  mono.m = m;
  mono.face_dof.assign(mesh.num_faces(), -1);
  mono.uhat_bnd.resize(mesh.num_faces());
  int nhat = 0;
  for (int fid = 0; fid < mesh.num_faces(); ++fid) {
    if (mesh.faces[fid].boundary())
      mono.uhat_bnd[fid] = project_face(mesh, fid, cfg.k, g, ex).coeffs;
    else {
      mono.face_dof[fid] = nhat;
      nhat += m;
    }
  }
  mono.off_u = nc * 2 * dimV;
  mono.off_uhat = mono.off_u + nc * dimW;
  const int n = mono.off_uhat + nhat;
  mono.mat = Eigen::MatrixXd::Zero(n, n);
  mono.rhs = Eigen::VectorXd::Zero(n);

  for (int cell = 0; cell < nc; ++cell) {
    const LocalSystem loc = local_matrices(mesh, cell, cfg, f);
    const int oq = cell * 2 * dimV;
    const int ou = mono.off_u + cell * dimW;
    // Row/column maps for the local x = (u, uhat0, uhat1, uhat2) block;
    // boundary faces contribute to the right-hand side instead.
    std::vector<int> xmap(dimW + 3 * m, -1);
    Eigen::VectorXd xknown = Eigen::VectorXd::Zero(dimW + 3 * m);
    for (int i = 0; i < dimW; ++i) xmap[i] = ou + i;
    for (int e = 0; e < 3; ++e) {
      const int fid = mesh.cell_faces(cell, e);
      if (mono.face_dof[fid] >= 0)
        for (int r = 0; r < m; ++r)
          xmap[dimW + e * m + r] = mono.off_uhat + mono.face_dof[fid] + r;
      else
        xknown.segment(dimW + e * m, m) = mono.uhat_bnd[fid];
    }

    mono.mat.block(oq, oq, 2 * dimV, 2 * dimV) += loc.A;
    for (int j = 0; j < dimW + 3 * m; ++j) {
      if (xmap[j] >= 0) {
        mono.mat.block(oq, xmap[j], 2 * dimV, 1) += loc.B.col(j);
        mono.mat.block(xmap[j], oq, 1, 2 * dimV) +=
            loc.B.col(j).transpose();
      } else {
        mono.rhs.segment(oq, 2 * dimV) -= loc.B.col(j) * xknown(j);
      }
    }
    for (int i = 0; i < dimW + 3 * m; ++i) {
      if (xmap[i] < 0) continue;
      mono.rhs(xmap[i]) += -loc.load(i);
      for (int j = 0; j < dimW + 3 * m; ++j) {
        if (xmap[j] >= 0)
          mono.mat(xmap[i], xmap[j]) -= loc.S(i, j);
        else
          mono.rhs(xmap[i]) += loc.S(i, j) * xknown(j);
      }
    }
  }
  return mono;
}

inline Solution solve_monolithic(const Mesh& mesh,
                                 const DiscretizationConfig& cfg,
                                 const ScalarField& f, const ScalarField& g) {
  const MonolithicSystem mono = assemble_monolithic(mesh, cfg, f, g);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(mono.mat);
  const Eigen::VectorXd x = lu.solve(mono.rhs);
  const double scale = std::max(1.0, mono.rhs.norm());
  if ((mono.mat * x - mono.rhs).norm() > 1e-9 * scale)
    throw std::runtime_error("solve_monolithic: dense solve failed");

  Solution sol;
  sol.cfg = cfg;
  sol.tau = cfg.tau_coeff / mesh.h_global;
  const int nc = mesh.num_cells();
  sol.q.resize(nc);
  sol.u.resize(nc);
  for (int cell = 0; cell < nc; ++cell) {
    sol.q[cell] = x.segment(cell * 2 * mono.dimV, 2 * mono.dimV);
    sol.u[cell] = x.segment(mono.off_u + cell * mono.dimW, mono.dimW);
  }
  sol.uhat.resize(mesh.num_faces());
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    sol.uhat[fid] = mesh.faces[fid].boundary()
                        ? mono.uhat_bnd[fid]
                        : x.segment(mono.off_uhat + mono.face_dof[fid], mono.m)
                              .eval();
  return sol;
}

// Maximum flux-continuity defect of a recovered solution: for every
// interior face and facet test mode, the two-sided moment
// <q.n + tau (u - uhat), mu>. Identical for all variants since mu has
// degree k.
inline double flux_residual(const Mesh& mesh, const DiscretizationConfig& cfg,
                            const Solution& sol) {
  const int m = cfg.k + 1;
  const double tau = cfg.tau_coeff / mesh.h_global;
  std::vector<Eigen::VectorXd> moments(mesh.num_faces(),
                                       Eigen::VectorXd::Zero(m));
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const detail::CellOps ops = detail::build_cell_ops(mesh, cell, cfg);
    for (int e = 0; e < 3; ++e) {
      const detail::FaceOps& fo = ops.face[e];
      if (mesh.faces[fo.fid].boundary()) continue;
      moments[fo.fid] +=
          fo.length *
          (fo.N.topRows(m) * sol.q[cell] +
           tau * (fo.RW.topRows(m) * sol.u[cell] - sol.uhat[fo.fid]));
    }
  }
  double worst = 0.0;
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    if (!mesh.faces[fid].boundary())
      worst = std::max(worst, moments[fid].cwiseAbs().maxCoeff());
  return worst;
}

// Residual of the three discrete equations evaluated at the elementwise
// interpolants (P_V q, P_W u, P_M u) of an exact solution, returned as L2
// dual norms (per block: flux equation, scalar equation, flux continuity).
// Used to verify the consistency rates the error analysis implies.
struct InterpolantResiduals {
  double flux_eq = 0.0;
  double scalar_eq = 0.0;
  double continuity = 0.0;
};

inline InterpolantResiduals interpolant_residuals(
    const Mesh& mesh, const DiscretizationConfig& cfg, const ScalarField& f,
    const ScalarField& u_exact, const VectorField& q_exact) {
  cfg.validate();
  const int m = cfg.k + 1;
  const int ex = cfg.effective_exactness();
  const int nc = mesh.num_cells();

  std::vector<Eigen::VectorXd> uhat(mesh.num_faces());
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    uhat[fid] = project_face(mesh, fid, cfg.k, u_exact, ex).coeffs;

  double ra2 = 0.0, rb2 = 0.0;
  std::vector<Eigen::VectorXd> cont(mesh.num_faces(),
                                    Eigen::VectorXd::Zero(m));
  for (int cell = 0; cell < nc; ++cell) {
    const LocalSystem loc = local_matrices(mesh, cell, cfg, f);
    const Eigen::VectorXd Q =
        project_cell_vector(mesh, cell, cfg.deg_v(), q_exact, ex);
    const Eigen::VectorXd U =
        project_cell(mesh, cell, cfg.deg_w(), u_exact, ex).coeffs;
    Eigen::VectorXd x(loc.dimW + 3 * m);
    x.head(loc.dimW) = U;
    for (int e = 0; e < 3; ++e)
      x.segment(loc.dimW + e * m, m) = uhat[mesh.cell_faces(cell, e)];

    const double detJ = cell_geom(mesh, cell).detJ;
    const Eigen::VectorXd res_q = loc.A * Q + loc.B * x;
    ra2 += res_q.squaredNorm() / detJ;
    // Scalar equation rows: -B_u^T q + (S x)_u = load_u.
    const Eigen::VectorXd sx = loc.S * x;
    const Eigen::VectorXd res_u =
        -loc.B.leftCols(loc.dimW).transpose() * Q + sx.head(loc.dimW) -
        loc.load.head(loc.dimW);
    rb2 += res_u.squaredNorm() / detJ;
    // Continuity rows: B_uhat^T q - (S x)_uhat accumulated over both sides.
    for (int e = 0; e < 3; ++e) {
      const int fid = mesh.cell_faces(cell, e);
      if (mesh.faces[fid].boundary()) continue;
      cont[fid] += loc.B.middleCols(loc.dimW + e * m, m).transpose() * Q -
                   sx.segment(loc.dimW + e * m, m);
    }
  }
  double rc2 = 0.0;
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    if (!mesh.faces[fid].boundary())
      rc2 += cont[fid].squaredNorm() / mesh.faces[fid].length;

  InterpolantResiduals res;
  res.flux_eq = std::sqrt(ra2);
  res.scalar_eq = std::sqrt(rb2);
  res.continuity = std::sqrt(rc2);
  return res;
}

}  // namespace projhdg
