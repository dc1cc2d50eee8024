// L2 projections onto cell and face polynomial spaces: reproduction,
// idempotence, orthogonality, best approximation, a dense Gram-solve
// oracle, facet-projection decay, and the facet residual functional R.

#include <projhdg/mesh.hpp>
#include <projhdg/projection.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using projhdg::Mesh;
using projhdg::ProjectedField;

const double kPi = std::acos(-1.0);

Mesh single_cell_mesh() {
  Eigen::MatrixXd vertices(3, 2);
  vertices << 0, 0, 0.1, 0, 0, 0.1;
  Eigen::MatrixXi cells(1, 3);
  cells << 0, 1, 2;
  return projhdg::build_connectivity(vertices, cells);
}

TEST(ProjectCell, ReproducesConstants) {
  const Mesh mesh = projhdg::generate_structured(2);
  for (int d = 0; d <= 4; ++d) {
    const ProjectedField pf = projhdg::project_cell(
        mesh, 3, d, [](const Eigen::Vector2d&) { return 2.5; });
    EXPECT_NEAR(pf.eval(Eigen::Vector2d(0.3, 0.2)), 2.5, 1e-13);
    EXPECT_NEAR(pf.eval(Eigen::Vector2d(0.1, 0.7)), 2.5, 1e-13);
  }
}

TEST(ProjectCell, DegreeZeroIsCellMean) {
  const Mesh mesh = projhdg::generate_structured(3);
  auto f = [](const Eigen::Vector2d& x) { return x.x() + x.y(); };
  for (int c : {0, 7, 12}) {
    const ProjectedField pf = projhdg::project_cell(mesh, c, 0, f);
    // The mean of a linear function is its centroid value.
    const projhdg::CellGeom geom = projhdg::cell_geom(mesh, c);
    const double mean = f(geom.map(Eigen::Vector2d(1.0 / 3.0, 1.0 / 3.0)));
    EXPECT_NEAR(pf.eval(Eigen::Vector2d(0.5, 0.25)), mean, 1e-14);
  }
}

TEST(ProjectCell, MatchesDenseGramSolve) {
  // Independent oracle: solve the normal equations in the physical
  // monomial basis with the same high-order rule, compare point values.
  const Mesh mesh = single_cell_mesh();
  auto f = [](const Eigen::Vector2d& x) {
    return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  };
  const int degree = 2, exactness = 20;
  const ProjectedField pf =
      projhdg::project_cell(mesh, 0, degree, f, exactness);

  const projhdg::QuadRule rule = projhdg::triangle_rule(exactness);
  const projhdg::CellGeom geom = projhdg::cell_geom(mesh, 0);
  const int dim = 6;
  auto monomial = [](const Eigen::Vector2d& x, int j) {
    switch (j) {
      case 0: return 1.0;
      case 1: return x.x();
      case 2: return x.y();
      case 3: return x.x() * x.x();
      case 4: return x.x() * x.y();
      default: return x.y() * x.y();
    }
  };
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  for (int p = 0; p < rule.size(); ++p) {
    const Eigen::Vector2d x = geom.map(rule.points.row(p).transpose());
    const double w = rule.weights(p) * geom.detJ;
    for (int i = 0; i < dim; ++i) {
      b(i) += w * f(x) * monomial(x, i);
      for (int j = 0; j < dim; ++j)
        G(i, j) += w * monomial(x, i) * monomial(x, j);
    }
  }
  const Eigen::VectorXd c = G.ldlt().solve(b);

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> uni(0.05, 0.4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Vector2d xhat(uni(gen), uni(gen));
    const Eigen::Vector2d x = geom.map(xhat);
    double oracle = 0.0;
    for (int j = 0; j < dim; ++j) oracle += c(j) * monomial(x, j);
    EXPECT_NEAR(pf.eval(xhat), oracle, 1e-10);
  }
}

TEST(ProjectCell, VectorStacksComponents) {
  const Mesh mesh = projhdg::generate_structured(2);
  auto fx = [](const Eigen::Vector2d& x) { return std::exp(x.x()); };
  auto fy = [](const Eigen::Vector2d& x) { return x.y() * x.x(); };
  const Eigen::VectorXd c = projhdg::project_cell_vector(
      mesh, 1, 2, [&](const Eigen::Vector2d& x) {
        return Eigen::Vector2d(fx(x), fy(x));
      });
  const ProjectedField px = projhdg::project_cell(mesh, 1, 2, fx);
  const ProjectedField py = projhdg::project_cell(mesh, 1, 2, fy);
  ASSERT_EQ(c.size(), 12);
  EXPECT_LE((c.head(6) - px.coeffs).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((c.tail(6) - py.coeffs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectFace, ReproducesCoordinateAndAveragesSquare) {
  Eigen::MatrixXd vertices(3, 2);
  vertices << 0, 0, 1, 0, 0, 1;
  Eigen::MatrixXi cells(1, 3);
  cells << 0, 1, 2;
  const Mesh mesh = projhdg::build_connectivity(vertices, cells);
  int bottom = -1;
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    if (mesh.faces[fid].v0 == 0 && mesh.faces[fid].v1 == 1) bottom = fid;
  ASSERT_GE(bottom, 0);

  auto fx = [](const Eigen::Vector2d& x) { return x.x(); };
  for (int d : {1, 2, 3}) {
    const ProjectedField pf = projhdg::project_face(mesh, bottom, d, fx);
    for (double t : {0.0, 0.3, 0.9})
      EXPECT_NEAR(pf.eval(Eigen::Vector2d(t, 0.0)), t, 1e-13);
  }
  auto fx2 = [](const Eigen::Vector2d& x) { return x.x() * x.x(); };
  const ProjectedField p0 = projhdg::project_face(mesh, bottom, 0, fx2);
  EXPECT_NEAR(p0.eval(Eigen::Vector2d(0.5, 0.0)), 1.0 / 3.0, 1e-14);
}

TEST(ProjectFace, SidedTracesDiffer) {
  Eigen::MatrixXd vertices(4, 2);
  vertices << 0, 0, 1, 0, 1, 1, 0, 1;
  Eigen::MatrixXi cells(2, 3);
  cells << 0, 1, 2, 0, 2, 3;
  const Mesh mesh = projhdg::build_connectivity(vertices, cells);
  int diag = -1;
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    if (!mesh.faces[fid].boundary()) diag = fid;
  ASSERT_GE(diag, 0);
  // A discontinuous piecewise polynomial: the facet unknowns are
  // double-valued, one trace per adjacent cell.
  auto w = [](const Eigen::Vector2d& x, int cell) {
    return cell == 0 ? x.x() : 3.0 * x.x() + 1.0;
  };
  const ProjectedField a = projhdg::project_face(mesh, diag, 1, w, 0);
  const ProjectedField bproj = projhdg::project_face(mesh, diag, 1, w, 1);
  EXPECT_GT((a.coeffs - bproj.coeffs).norm(), 0.5);
  EXPECT_EQ(a.side, 0);
  EXPECT_EQ(bproj.side, 1);
}

TEST(Projection, IdempotentOnItsRange) {
  const Mesh mesh = projhdg::generate_structured(2);
  auto f = [](const Eigen::Vector2d& x) {
    return std::sin(kPi * x.x()) * std::cos(kPi * x.y());
  };
  for (int d : {0, 1, 2, 3}) {
    const ProjectedField pf = projhdg::project_cell(mesh, 2, d, f);
    const projhdg::CellGeom geom = projhdg::cell_geom(mesh, 2);
    const ProjectedField pf2 = projhdg::project_cell(
        mesh, 2, d,
        [&](const Eigen::Vector2d& x) { return pf.eval(geom.unmap(x)); });
    EXPECT_LE((pf.coeffs - pf2.coeffs).cwiseAbs().maxCoeff(), 1e-12);

    const ProjectedField qf = projhdg::project_face(mesh, 5, d, f);
    const ProjectedField qf2 = projhdg::project_face(
        mesh, 5, d, [&](const Eigen::Vector2d& x) {
          // Recover the face parameter from the endpoints.
          const Eigen::Vector2d a =
              mesh.vertices.row(mesh.faces[5].v0).transpose();
          const Eigen::Vector2d b =
              mesh.vertices.row(mesh.faces[5].v1).transpose();
          const double t = (x - a).dot(b - a) / (b - a).squaredNorm();
          return qf.eval(Eigen::Vector2d(t, 0.0));
        });
    EXPECT_LE((qf.coeffs - qf2.coeffs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Projection, ResidualOrthogonalToRange) {
  const Mesh mesh = projhdg::generate_structured(2);
  auto f = [](const Eigen::Vector2d& x) {
    return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  };
  const int d = 2, exactness = 2 * d + 3;
  const ProjectedField pf = projhdg::project_cell(mesh, 1, d, f, exactness);
  const auto& tab = projhdg::detail::cell_tab(d, exactness);
  const projhdg::CellGeom geom = projhdg::cell_geom(mesh, 1);
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(pf.coeffs.size());
  for (int p = 0; p < tab.rule->size(); ++p) {
    const Eigen::Vector2d xhat = tab.rule->points.row(p).transpose();
    const double defect = f(geom.map(xhat)) - pf.eval(xhat);
    moments += tab.rule->weights(p) * defect * tab.val.row(p).transpose();
  }
  EXPECT_LE(moments.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, PerturbationIncreasesResidual) {
  const Mesh mesh = projhdg::generate_structured(2);
  auto f = [](const Eigen::Vector2d& x) {
    return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  };
  const int d = 2, exactness = 2 * d + 3;
  const ProjectedField pf = projhdg::project_cell(mesh, 4, d, f, exactness);
  const auto& tab = projhdg::detail::cell_tab(d, exactness);
  const projhdg::CellGeom geom = projhdg::cell_geom(mesh, 4);
  auto residual2 = [&](const Eigen::VectorXd& coeffs) {
    double r2 = 0.0;
    for (int p = 0; p < tab.rule->size(); ++p) {
      const Eigen::Vector2d xhat = tab.rule->points.row(p).transpose();
      const double defect =
          f(geom.map(xhat)) - tab.val.row(p).dot(coeffs);
      r2 += tab.rule->weights(p) * defect * defect;
    }
    return r2;
  };
  const double base = residual2(pf.coeffs);
  for (int i = 0; i < pf.coeffs.size(); ++i)
    for (double delta : {1e-3, -1e-3}) {
      Eigen::VectorXd c = pf.coeffs;
      c(i) += delta;
      EXPECT_GT(residual2(c), base) << "coefficient " << i;
    }
}

TEST(Projection, FacetErrorDecaysAtHalfOrderShift) {
  auto f = [](const Eigen::Vector2d& x) {
    return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  };
  for (int k = 0; k <= 2; ++k) {
    std::vector<double> errs;
    for (int n : {4, 8, 16, 32}) {
      const Mesh mesh = projhdg::generate_structured(n);
      const auto& tab = projhdg::detail::face_tab(k, 12);
      double total = 0.0;
      for (int c = 0; c < mesh.num_cells(); ++c)
        for (int e = 0; e < 3; ++e) {
          const int fid = mesh.cell_faces(c, e);
          const ProjectedField pf = projhdg::project_face(mesh, fid, k, f, 12);
          double acc = 0.0;
          for (int p = 0; p < tab.rule->size(); ++p) {
            const double t = tab.rule->points(p, 0);
            const double defect = f(projhdg::face_point(mesh, fid, t)) -
                                  tab.val.row(p).dot(pf.coeffs);
            acc += tab.rule->weights(p) * defect * defect;
          }
          total += mesh.faces[fid].length * acc;
        }
      errs.push_back(std::sqrt(total));
    }
    const double order = std::log(errs[errs.size() - 2] / errs.back()) /
                         std::log(2.0);
    EXPECT_GE(order, k + 0.5 - 0.2) << "k=" << k;
  }
}

// Random polynomial in the physical coordinates with coefficients in
// [-1, 1], via a seeded generator.
projhdg::ScalarField random_poly(int degree, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> coef;
  for (int t = 0; t <= degree; ++t)
    for (int a = t; a >= 0; --a) coef.push_back(uni(gen));
  return [degree, coef](const Eigen::Vector2d& x) {
    double v = 0.0;
    size_t idx = 0;
    for (int t = 0; t <= degree; ++t)
      for (int a = t; a >= 0; --a, ++idx)
        v += coef[idx] * std::pow(x.x(), a) * std::pow(x.y(), t - a);
    return v;
  };
}

TEST(ResidualR, VanishesForPiecewiseDegreeKFlux) {
  const Mesh mesh = projhdg::generate_structured(2);
  for (int k = 0; k <= 2; ++k) {
    // v componentwise P_k per cell, discontinuous across faces; since the
    // normals are facewise constant, v.n restricted to a face stays in
    // P_k, and the projection defect vanishes side by side.
    std::vector<projhdg::ScalarField> vx, vy;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      vx.push_back(random_poly(k, 100 + c));
      vy.push_back(random_poly(k, 200 + c));
    }
    const projhdg::SidedVectorField v =
        [&](const Eigen::Vector2d& x, int cell) {
          return Eigen::Vector2d(vx[cell](x), vy[cell](x));
        };
    const projhdg::SidedScalarField w = [](const Eigen::Vector2d& x, int) {
      return std::cos(3.0 * x.x()) + x.y();
    };
    const double r = projhdg::residual_R(mesh, k, v, w, 20);
    EXPECT_LE(std::abs(r), 1e-12) << "k=" << k;
  }
}

TEST(ResidualR, VanishesForSingleValuedFacetTests) {
  const Mesh mesh = projhdg::generate_structured(2);
  for (int k = 0; k <= 2; ++k) {
    // Smooth v, w whose facet traces lie in P_k and are single-valued:
    // interior contributions cancel in pairs and boundary defects are
    // orthogonal to w.
    const projhdg::ScalarField wk = random_poly(k, 17);
    const projhdg::SidedScalarField w =
        [&wk](const Eigen::Vector2d& x, int) { return wk(x); };
    const projhdg::SidedVectorField v = [](const Eigen::Vector2d& x, int) {
      return Eigen::Vector2d(std::sin(2.0 * x.x() + x.y()),
                             std::cos(x.x() - x.y()));
    };
    const double r = projhdg::residual_R(mesh, k, v, w, 20);
    EXPECT_LE(std::abs(r), 1e-12) << "k=" << k;
  }
}

TEST(ResidualR, MatchesProjectedDefectIdentity) {
  // R(v, w) = <(I - P_M)(v - Pi_k v).n, (I - P_M) w> over the mesh
  // skeleton, both sides by independent quadrature.
  const Mesh mesh = projhdg::generate_structured(2);
  for (int k = 0; k <= 2; ++k) {
    for (unsigned trial = 0; trial < 5; ++trial) {
      const projhdg::ScalarField vxp = random_poly(k + 1, 300 + 10 * k + trial);
      const projhdg::ScalarField vyp = random_poly(k + 1, 400 + 10 * k + trial);
      const projhdg::ScalarField wp = random_poly(k + 1, 500 + 10 * k + trial);
      const projhdg::SidedVectorField v =
          [&](const Eigen::Vector2d& x, int) {
            return Eigen::Vector2d(vxp(x), vyp(x));
          };
      const projhdg::SidedScalarField w =
          [&](const Eigen::Vector2d& x, int) { return wp(x); };
      const int exactness = 2 * (k + 2) + 3;
      const double lhs = projhdg::residual_R(mesh, k, v, w, exactness);

      const auto& tab = projhdg::detail::face_tab(k, exactness);
      const int np = tab.rule->size();
      double rhs = 0.0;
      for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXd pik = projhdg::project_cell_vector(
            mesh, c, k, [&](const Eigen::Vector2d& x) {
              return Eigen::Vector2d(vxp(x), vyp(x));
            });
        const projhdg::CellGeom geom = projhdg::cell_geom(mesh, c);
        const auto& kb = projhdg::cell_basis(k);
        const int dim = kb.dim();
        for (int e = 0; e < 3; ++e) {
          const int fid = mesh.cell_faces(c, e);
          const Eigen::Vector2d n =
              mesh.sign(c, fid) * mesh.faces[fid].normal;
          Eigen::VectorXd an(np), wv(np);
          for (int p = 0; p < np; ++p) {
            const Eigen::Vector2d x =
                projhdg::face_point(mesh, fid, tab.rule->points(p, 0));
            const Eigen::VectorXd phi =
                kb.eval_point(geom.unmap(x).x(), geom.unmap(x).y());
            const Eigen::Vector2d pikv(phi.dot(pik.head(dim)),
                                       phi.dot(pik.tail(dim)));
            an(p) = (Eigen::Vector2d(vxp(x), vyp(x)) - pikv).dot(n);
            wv(p) = wp(x);
          }
          const Eigen::VectorXd ca =
              tab.val.transpose() * (tab.rule->weights.asDiagonal() * an);
          const Eigen::VectorXd cw =
              tab.val.transpose() * (tab.rule->weights.asDiagonal() * wv);
          const Eigen::VectorXd da = an - tab.val * ca;
          const Eigen::VectorXd dw = wv - tab.val * cw;
          rhs += mesh.faces[fid].length *
                 tab.rule->weights.dot((da.array() * dw.array()).matrix());
        }
      }
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * scale)
          << "k=" << k << " trial=" << trial;
    }
  }
}

}  // namespace
