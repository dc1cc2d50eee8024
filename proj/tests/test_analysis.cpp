// Error norms against exact solutions and observed-order arithmetic.

#include <projhdg/analysis.hpp>
#include <projhdg/study.hpp>

#include <gtest/gtest.h>

#include <cmath>

namespace {

using projhdg::DiscretizationConfig;
using projhdg::Mesh;
using projhdg::MethodVariant;
using projhdg::Solution;

const double kPi = std::acos(-1.0);

DiscretizationConfig make_cfg(int k, int l) {
  DiscretizationConfig cfg;
  cfg.variant = MethodVariant::Proj;
  cfg.k = k;
  cfg.l = l;
  return cfg;
}

// A Solution whose fields are elementwise projections of the given exact
// fields (facets take the facewise trace projection).
Solution interpolant_solution(const Mesh& mesh,
                              const DiscretizationConfig& cfg,
                              const projhdg::ScalarField& u,
                              const projhdg::VectorField& q) {
  Solution sol;
  sol.cfg = cfg;
  sol.tau = cfg.tau_coeff / mesh.h_global;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    sol.q.push_back(projhdg::project_cell_vector(mesh, c, cfg.deg_v(), q));
    sol.u.push_back(projhdg::project_cell(mesh, c, cfg.deg_w(), u).coeffs);
  }
  for (int fid = 0; fid < mesh.num_faces(); ++fid)
    sol.uhat.push_back(projhdg::project_face(mesh, fid, cfg.deg_m(), u).coeffs);
  return sol;
}

TEST(ErrorNorms, VanishOnCompatiblePolynomials) {
  const Mesh mesh = projhdg::generate_structured(3);
  const DiscretizationConfig cfg = make_cfg(1, 0);
  // u quadratic (deg_w = 2), q linear (deg_v = 1): both inside the spaces,
  // so the projections reproduce them and every norm is zero.
  auto u = [](const Eigen::Vector2d& x) {
    return x.x() * x.x() - x.y() * x.y() + 0.5 * x.x();
  };
  auto q = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-2.0 * x.x() - 0.5, 2.0 * x.y());
  };
  const Solution sol = interpolant_solution(mesh, cfg, u, q);
  const projhdg::ErrorReport rep =
      projhdg::compute_errors(mesh, cfg, sol, u, q);
  EXPECT_LE(rep.err_q, 1e-12);
  EXPECT_LE(rep.err_u, 1e-12);
  EXPECT_LE(rep.err_jump, 1e-11);
}

TEST(ErrorNorms, ProjectionErrorIsPositiveForSin) {
  const Mesh mesh = projhdg::generate_structured(3);
  const DiscretizationConfig cfg = make_cfg(1, 0);
  auto u = [](const Eigen::Vector2d& x) {
    return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  };
  auto q = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                           -kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
  };
  const Solution sol = interpolant_solution(mesh, cfg, u, q);
  const projhdg::ErrorReport rep =
      projhdg::compute_errors(mesh, cfg, sol, u, q);
  EXPECT_GT(rep.err_q, 1e-3);
  EXPECT_GT(rep.err_u, 1e-5);
}

TEST(ErrorNorms, ScaleLinearly) {
  // Against zero exact fields the norms are plain discrete norms, so
  // scaling every coefficient scales each norm exactly.
  const Mesh mesh = projhdg::generate_structured(2);
  const DiscretizationConfig cfg = make_cfg(1, 1);
  auto u = [](const Eigen::Vector2d& x) { return std::exp(x.x() - x.y()); };
  auto q = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(std::sin(x.y()), std::cos(x.x()));
  };
  Solution sol = interpolant_solution(mesh, cfg, u, q);
  auto zero_u = [](const Eigen::Vector2d&) { return 0.0; };
  auto zero_q = [](const Eigen::Vector2d&) {
    return Eigen::Vector2d(0.0, 0.0);
  };
  const projhdg::ErrorReport base =
      projhdg::compute_errors(mesh, cfg, sol, zero_u, zero_q);
  const double alpha = -3.25;
  for (auto& c : sol.q) c *= alpha;
  for (auto& c : sol.u) c *= alpha;
  for (auto& c : sol.uhat) c *= alpha;
  const projhdg::ErrorReport scaled =
      projhdg::compute_errors(mesh, cfg, sol, zero_u, zero_q);
  EXPECT_NEAR(scaled.err_q, std::abs(alpha) * base.err_q,
              1e-12 * base.err_q);
  EXPECT_NEAR(scaled.err_u, std::abs(alpha) * base.err_u,
              1e-12 * base.err_u);
  EXPECT_NEAR(scaled.err_jump, std::abs(alpha) * base.err_jump,
              1e-12 * std::max(base.err_jump, 1.0));
}

TEST(JumpNorm, ZeroWhenFacetsMatchProjectedTraces) {
  // With u_h a global polynomial of degree deg_w, its facet traces are
  // single-valued; setting uhat = P_M(trace) kills every jump.
  const Mesh mesh = projhdg::generate_structured(2);
  const DiscretizationConfig cfg = make_cfg(1, 0);
  auto u = [](const Eigen::Vector2d& x) {
    return 1.0 + x.x() - 2.0 * x.y() + x.x() * x.y();
  };
  auto q = [](const Eigen::Vector2d&) { return Eigen::Vector2d(0.0, 0.0); };
  const Solution sol = interpolant_solution(mesh, cfg, u, q);
  EXPECT_LE(projhdg::jump_norm(mesh, cfg, sol), 1e-12);
}

TEST(ObservedOrder, HalvingGivesOne) {
  EXPECT_NEAR(projhdg::observed_order(2.0e-3, 0.5, 1.0e-3, 0.25), 1.0, 1e-14);
}

TEST(ObservedOrder, ReportedTablePairs) {
  // Fixed error pairs whose observed orders are known to two decimals.
  EXPECT_NEAR(projhdg::observed_order(3.083e-3, 1.0 / 20.0, 7.655e-4,
                                      1.0 / 40.0),
              2.01, 0.005);
  EXPECT_NEAR(projhdg::observed_order(2.365e-4, 1.0 / 10.0, 2.718e-5,
                                      1.0 / 20.0),
              3.12, 0.005);
}

TEST(ObservedOrder, RejectsNonPositiveInput) {
  EXPECT_THROW(projhdg::observed_order(0.0, 0.5, 1e-3, 0.25),
               std::invalid_argument);
  EXPECT_THROW(projhdg::observed_order(1e-3, 0.5, -1e-3, 0.25),
               std::invalid_argument);
  EXPECT_THROW(projhdg::observed_order(1e-3, 0.5, 1e-3, 0.5),
               std::invalid_argument);
}

}  // namespace
