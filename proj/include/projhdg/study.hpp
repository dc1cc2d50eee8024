// Convergence-study driver: batches of (variant, k, l, n) runs over the
// built-in problem family, convergence records with observed orders, CSV
// and markdown emission, and a side-by-side method comparison that flags
// sub-optimal rates.

#pragma once

#include <projhdg/analysis.hpp>
#include <projhdg/hdg.hpp>
#include <projhdg/mesh.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace projhdg {

// Manufactured problems on the unit square.
//   "paper-sin":  u = sin(pi x) sin(pi y), homogeneous Dirichlet data.
//   "patch:<d>":  u = (x + y)^d, polynomial Dirichlet data.
struct Problem {
  std::string id;
  ScalarField u;
  VectorField q;    // q = -grad u
  ScalarField f;    // f = div q
  ScalarField g;    // Dirichlet data, the trace of u
};

inline Problem make_problem(const std::string& id) {
  Problem prob;
  prob.id = id;
  if (id == "paper-sin") {
    const double pi = std::acos(-1.0);
    prob.u = [pi](const Eigen::Vector2d& x) {
      return std::sin(pi * x.x()) * std::sin(pi * x.y());
    };
    prob.q = [pi](const Eigen::Vector2d& x) {
      return Eigen::Vector2d(-pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                             -pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
    };
    prob.f = [pi](const Eigen::Vector2d& x) {
      return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
    };
    prob.g = prob.u;
    return prob;
  }
  if (id.rfind("patch:", 0) == 0) {
    int d = -1;
    try {
      size_t pos = 0;
      d = std::stoi(id.substr(6), &pos);
      if (pos != id.size() - 6) d = -1;
    } catch (...) {
      d = -1;
    }
    if (d < 0 || d > 8)
      throw std::invalid_argument("make_problem: patch degree out of range");
    auto pw = [](double s, int e) {
      double r = 1.0;
      for (int i = 0; i < e; ++i) r *= s;
      return r;
    };
    prob.u = [d, pw](const Eigen::Vector2d& x) { return pw(x.x() + x.y(), d); };
    prob.q = [d, pw](const Eigen::Vector2d& x) {
      const double s = d == 0 ? 0.0 : -d * pw(x.x() + x.y(), d - 1);
      return Eigen::Vector2d(s, s);
    };
    prob.f = [d, pw](const Eigen::Vector2d& x) {
      return d < 2 ? 0.0 : -2.0 * d * (d - 1) * pw(x.x() + x.y(), d - 2);
    };
    prob.g = prob.u;
    return prob;
  }
  throw std::invalid_argument("make_problem: unknown problem id " + id);
}

struct StudyConfig {
  std::string problem = "paper-sin";
  std::vector<MethodVariant> variants = {MethodVariant::Proj};
  std::vector<int> k_values = {1};
  std::vector<int> l_values = {0};
  std::vector<int> levels = {10, 20, 40, 80};
  double tau_coeff = 1.0;
  std::string format = "csv";    // csv | markdown
  std::string out;               // output path; empty writes to stdout

  void validate() const {
    make_problem(problem);
    if (variants.empty())
      throw std::invalid_argument("study config: no variants selected");
    if (k_values.empty() || l_values.empty())
      throw std::invalid_argument("study config: empty k or l selection");
    for (int k : k_values)
      if (k < 0 || k > 3)
        throw std::invalid_argument("study config: k must be in 0..3");
    for (int k : k_values)
      for (int l : l_values)
        if (l < 0 || k + l > 6)
          throw std::invalid_argument("study config: need l >= 0 and k+l <= 6");
    if (levels.empty())
      throw std::invalid_argument("study config: no mesh levels");
    for (size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] <= 0)
        throw std::invalid_argument("study config: levels must be positive");
      if (i > 0 && levels[i] <= levels[i - 1])
        throw std::invalid_argument(
            "study config: levels must be strictly increasing");
    }
    if (!(tau_coeff > 0.0))
      throw std::invalid_argument("study config: tau coefficient must be positive");
    if (format != "csv" && format != "markdown")
      throw std::invalid_argument("study config: format must be csv or markdown");
  }
};

struct ConvergenceRecord {
  MethodVariant variant = MethodVariant::Proj;
  int k = 0, l = 0, n = 0;
  double h = 0.0;
  double err_q = 0.0, err_u = 0.0, err_jump = 0.0;
  // Absent on the first level and whenever an error pair underflows the
  // zero-error guard (either error <= 1e-12).
  std::optional<double> order_q, order_u, order_jump;
};

namespace detail {

constexpr double kZeroErrorGuard = 1e-12;

inline std::optional<double> guarded_order(double e1, double h1, double e2,
                                           double h2) {
  if (e1 <= kZeroErrorGuard || e2 <= kZeroErrorGuard) return std::nullopt;
  return observed_order(e1, h1, e2, h2);
}

}  // namespace detail

// Runs the full (variant, k, l, level) matrix in configuration order.
// Solver failures are rethrown annotated with the failing tuple.
inline std::vector<ConvergenceRecord> run_study(const StudyConfig& config) {
  config.validate();
  const Problem prob = make_problem(config.problem);
  std::map<int, Mesh> meshes;
  for (int n : config.levels) meshes.emplace(n, generate_structured(n));

  std::vector<ConvergenceRecord> records;
  for (MethodVariant variant : config.variants)
    for (int k : config.k_values)
      for (int l : config.l_values) {
        const ConvergenceRecord* prev = nullptr;
        for (int n : config.levels) {
          DiscretizationConfig cfg;
          cfg.variant = variant;
          cfg.k = k;
          cfg.l = l;
          cfg.tau_coeff = config.tau_coeff;
          const Mesh& mesh = meshes.at(n);
          ConvergenceRecord rec;
          rec.variant = variant;
          rec.k = k;
          rec.l = l;
          rec.n = n;
          rec.h = mesh.h_global;
          try {
            const Solution sol = solve(mesh, cfg, prob.f, prob.g);
            const ErrorReport rep =
                compute_errors(mesh, cfg, sol, prob.u, prob.q);
            rec.err_q = rep.err_q;
            rec.err_u = rep.err_u;
            rec.err_jump = rep.err_jump;
          } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "run_study failed at variant=" << to_string(variant)
                << " k=" << k << " l=" << l << " n=" << n << ": " << e.what();
            throw std::runtime_error(msg.str());
          }
          if (prev) {
            rec.order_q = detail::guarded_order(prev->err_q, prev->h,
                                                rec.err_q, rec.h);
            rec.order_u = detail::guarded_order(prev->err_u, prev->h,
                                                rec.err_u, rec.h);
            rec.order_jump = detail::guarded_order(prev->err_jump, prev->h,
                                                   rec.err_jump, rec.h);
          }
          records.push_back(rec);
          prev = &records.back();
        }
      }
  return records;
}

namespace detail {

inline std::string fmt_e(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

inline std::string fmt_opt_e(const std::optional<double>& v) {
  return v ? fmt_e(*v) : std::string();
}

inline std::string fmt_f2(const std::optional<double>& v) {
  if (!v) return "--";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

inline const char* kCsvHeader =
    "variant,k,l,n,err_q,order_q,err_u,order_u,err_jump,order_jump";

inline std::string csv_row(const ConvergenceRecord& r) {
  std::ostringstream os;
  os << to_string(r.variant) << ',' << r.k << ',' << r.l << ',' << r.n << ','
     << fmt_e(r.err_q) << ',' << fmt_opt_e(r.order_q) << ',' << fmt_e(r.err_u)
     << ',' << fmt_opt_e(r.order_u) << ',' << fmt_e(r.err_jump) << ','
     << fmt_opt_e(r.order_jump);
  return os.str();
}

inline std::string markdown_group(const std::vector<ConvergenceRecord>& recs) {
  // One table per enrichment l, as convergence histories are read.
  std::vector<int> ls;
  for (const auto& r : recs)
    if (ls.empty() || ls.back() != r.l) ls.push_back(r.l);
  std::ostringstream os;
  for (int l : ls) {
    os << "### " << to_string(recs.front().variant) << ", k=" << recs.front().k
       << ", l=" << l << "\n\n";
    os << "| n | err_q | order | err_u | order | err_jump | order |\n";
    os << "|---|-------|-------|-------|-------|----------|-------|\n";
    for (const auto& r : recs) {
      if (r.l != l) continue;
      os << "| " << r.n << " | " << fmt_e(r.err_q) << " | "
         << fmt_f2(r.order_q) << " | " << fmt_e(r.err_u) << " | "
         << fmt_f2(r.order_u) << " | " << fmt_e(r.err_jump) << " | "
         << fmt_f2(r.order_jump) << " |\n";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace detail

// Table for one (variant, k) group of records. Rejects mixed groups; use
// emit_records for a whole study.
inline std::string emit_table(const std::vector<ConvergenceRecord>& records,
                              const std::string& format) {
  if (records.empty())
    throw std::invalid_argument("emit_table: no records");
  for (const auto& r : records)
    if (r.variant != records.front().variant || r.k != records.front().k)
      throw std::invalid_argument(
          "emit_table: records must come from one (variant, k) group");
  if (format == "csv") {
    std::ostringstream os;
    os << detail::kCsvHeader << "\n";
    for (const auto& r : records) os << detail::csv_row(r) << "\n";
    return os.str();
  }
  if (format == "markdown") return detail::markdown_group(records);
  throw std::invalid_argument("emit_table: format must be csv or markdown");
}

// Whole-study emission: one CSV header followed by all rows in record
// order, or concatenated markdown sections per (variant, k) group.
inline std::string emit_records(const std::vector<ConvergenceRecord>& records,
                                const std::string& format) {
  if (format == "csv") {
    std::ostringstream os;
    os << detail::kCsvHeader << "\n";
    for (const auto& r : records) os << detail::csv_row(r) << "\n";
    return os.str();
  }
  if (format == "markdown") {
    std::ostringstream os;
    size_t i = 0;
    while (i < records.size()) {
      size_t j = i;
      while (j < records.size() && records[j].variant == records[i].variant &&
             records[j].k == records[i].k)
        ++j;
      os << detail::markdown_group(std::vector<ConvergenceRecord>(
          records.begin() + i, records.begin() + j));
      i = j;
    }
    return os.str();
  }
  throw std::invalid_argument("emit_records: format must be csv or markdown");
}

// Side-by-side comparison of the variants' finest-pair orders, one block
// per (k, l). Orders below (expected - 0.2), with expected orders k+1 for
// the flux and jump and k+2 for the scalar, are marked with '*' and raise
// the flag.
struct CompareResult {
  std::string table;
  bool flagged = false;
};

inline CompareResult compare_methods(const StudyConfig& config) {
  config.validate();
  if (config.variants.size() < 2)
    throw std::invalid_argument("compare_methods: need at least two variants");
  if (config.levels.size() < 2)
    throw std::invalid_argument("compare_methods: need at least two levels");
  const std::vector<ConvergenceRecord> records = run_study(config);

  CompareResult result;
  std::ostringstream os;
  const int n1 = config.levels[config.levels.size() - 2];
  const int n2 = config.levels.back();
  auto mark = [&result](const std::optional<double>& order, double expected) {
    std::string s = detail::fmt_f2(order);
    if (order && *order < expected - 0.2) {
      s += '*';
      result.flagged = true;
    }
    return s;
  };
  for (int k : config.k_values)
    for (int l : config.l_values) {
      os << "k=" << k << " l=" << l << " (orders from n=" << n1 << " -> " << n2
         << ", '*' = below expected - 0.2)\n";
      os << "variant  err_q         order_q  err_u         order_u  "
            "err_jump      order_jump\n";
      for (MethodVariant variant : config.variants) {
        const ConvergenceRecord* fin = nullptr;
        for (const auto& r : records)
          if (r.variant == variant && r.k == k && r.l == l && r.n == n2)
            fin = &r;
        if (!fin) continue;
        char line[160];
        std::snprintf(line, sizeof(line), "%-8s %-13s %-8s %-13s %-8s %-13s %s\n",
                      to_string(variant).c_str(),
                      detail::fmt_e(fin->err_q).c_str(),
                      mark(fin->order_q, k + 1.0).c_str(),
                      detail::fmt_e(fin->err_u).c_str(),
                      mark(fin->order_u, k + 2.0).c_str(),
                      detail::fmt_e(fin->err_jump).c_str(),
                      mark(fin->order_jump, k + 1.0).c_str());
        os << line;
      }
      os << "\n";
    }
  result.table = os.str();
  return result;
}

}  // namespace projhdg
