// Command-line driver: single solves with an error report, batch convergence
// studies from a JSON config, and side-by-side method comparison that exits
// with code 2 when a variant falls below its expected order.

#include <projhdg/study.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

std::string normalize_format(std::string fmt) {
  return fmt == "md" ? "markdown" : fmt;
}

std::vector<int> int_list(const nlohmann::json& j, const std::string& key) {
  const nlohmann::json& v = j.at(key);
  if (v.is_number_integer()) return {v.get<int>()};
  if (!v.is_array())
    throw std::runtime_error("config key '" + key +
                             "' must be an integer or an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer())
      throw std::runtime_error("config key '" + key +
                               "' must contain integers only");
    out.push_back(e.get<int>());
  }
  return out;
}

projhdg::StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  if (!j.is_object())
    throw std::runtime_error("config root must be a JSON object");
  static const std::set<std::string> allowed = {
      "problem", "variants", "k", "l", "levels", "tau_coeff", "format", "out"};
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw std::runtime_error(
          "unknown config key '" + item.key() +
          "' (allowed: problem, variants, k, l, levels, tau_coeff, format, "
          "out)");

  projhdg::StudyConfig cfg;
  if (j.contains("problem")) cfg.problem = j.at("problem").get<std::string>();
  if (j.contains("variants")) {
    if (!j.at("variants").is_array())
      throw std::runtime_error("config key 'variants' must be an array");
    cfg.variants.clear();
    for (const auto& v : j.at("variants"))
      cfg.variants.push_back(
          projhdg::variant_from_string(v.get<std::string>()));
  }
  if (j.contains("k")) cfg.k_values = int_list(j, "k");
  if (j.contains("l")) cfg.l_values = int_list(j, "l");
  if (j.contains("levels")) cfg.levels = int_list(j, "levels");
  if (j.contains("tau_coeff")) cfg.tau_coeff = j.at("tau_coeff").get<double>();
  if (j.contains("format"))
    cfg.format = normalize_format(j.at("format").get<std::string>());
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  return cfg;
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot open output file: " + out);
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("failed writing output file: " + out);
}

int run_solve(const std::string& method, int k, int l, int n, double tau_coeff,
              const std::string& problem) {
  projhdg::DiscretizationConfig cfg;
  cfg.variant = projhdg::variant_from_string(method);
  cfg.k = k;
  cfg.l = l;
  cfg.tau_coeff = tau_coeff;
  cfg.validate();

  const projhdg::Problem prob = projhdg::make_problem(problem);
  const projhdg::Mesh mesh = projhdg::generate_structured(n);
  const projhdg::Solution sol = projhdg::solve(mesh, cfg, prob.f, prob.g);
  const projhdg::ErrorReport rep =
      projhdg::compute_errors(mesh, cfg, sol, prob.u, prob.q);
  const double res = projhdg::flux_residual(mesh, cfg, sol);

  int interior = 0;
  for (const auto& face : mesh.faces)
    if (!face.boundary()) ++interior;

  std::printf("problem       %s\n", prob.id.c_str());
  std::printf("method        %s  k=%d  l=%d  n=%d  tau=%.6e\n",
              projhdg::to_string(cfg.variant).c_str(), k, l, n, sol.tau);
  std::printf("mesh          %ld cells, %zu faces (%d interior), h=%.6e\n",
              static_cast<long>(mesh.cells.rows()), mesh.faces.size(),
              interior, mesh.h_global);
  std::printf("trace dofs    %d\n", interior * (k + 1));
  std::printf("err_q         %.6e\n", rep.err_q);
  std::printf("err_u         %.6e\n", rep.err_u);
  std::printf("err_jump      %.6e\n", rep.err_jump);
  std::printf("flux_residual %.6e\n", res);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Convergence studies for three HDG variants of the Poisson problem on "
      "the unit square"};
  app.require_subcommand(1);

  auto* solve_cmd =
      app.add_subcommand("solve", "Run a single solve and print error norms");
  std::string method;
  int k = 0, l = 0, n = 0;
  double tau_coeff = 1.0;
  std::string problem = "paper-sin";
  solve_cmd->add_option("--method", method, "variant: std, ls or proj")
      ->required()
      ->check(CLI::IsMember({"std", "ls", "proj"}));
  solve_cmd->add_option("--k", k, "facet degree (0..3)")->required();
  solve_cmd->add_option("--l", l, "flux enrichment, flux space P_{k+l}")
      ->required();
  solve_cmd->add_option("--n", n, "mesh parameter (n x n squares, bisected)")
      ->required()
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--tau-coeff", tau_coeff,
                        "coefficient c in tau = c/h (default 1)");
  solve_cmd->add_option("--problem", problem,
                        "problem id: paper-sin or patch:<degree>");

  auto* study_cmd = app.add_subcommand(
      "study", "Run a (variant, k, l, level) study matrix from a JSON config");
  std::string study_config_path, study_format, study_out;
  study_cmd->add_option("--config", study_config_path, "JSON config path")
      ->required();
  study_cmd->add_option("--format", study_format, "csv or md")
      ->check(CLI::IsMember({"csv", "md", "markdown"}));
  study_cmd->add_option("--out", study_out, "output path (default stdout)");

  auto* compare_cmd = app.add_subcommand(
      "compare",
      "Compare the variants' finest-pair orders; exit 2 on sub-optimal rates");
  std::string compare_config_path;
  compare_cmd->add_option("--config", compare_config_path, "JSON config path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed())
      return run_solve(method, k, l, n, tau_coeff, problem);
    if (study_cmd->parsed()) {
      projhdg::StudyConfig cfg = load_config(study_config_path);
      if (!study_format.empty()) cfg.format = normalize_format(study_format);
      if (!study_out.empty()) cfg.out = study_out;
      cfg.validate();
      const auto records = projhdg::run_study(cfg);
      write_output(projhdg::emit_records(records, cfg.format), cfg.out);
      return 0;
    }
    if (compare_cmd->parsed()) {
      projhdg::StudyConfig cfg = load_config(compare_config_path);
      cfg.validate();
      const projhdg::CompareResult result = projhdg::compare_methods(cfg);
      std::cout << result.table;
      return result.flagged ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
