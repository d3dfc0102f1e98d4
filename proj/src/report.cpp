#include "dcopt/report.hpp"

#include <cmath>
#include <cstdio>

#include "dcopt/problems.hpp"

namespace dcopt {

std::string format_sig(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

namespace {

constexpr int kValueDigits = 17;
constexpr int kTimeDigits = 3;

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += '\t';
    out += cells[i];
  }
  out += '\n';
  return out;
}

double mean_of(const std::vector<RunSummary>& runs, double RunSummary::*field) {
  double total = 0.0;
  for (const auto& r : runs) total += r.*field;
  return total / static_cast<double>(runs.size());
}

}  // namespace

Table emit_table(const std::vector<RunSummary>& runs, bool include_time) {
  std::vector<std::string> header = {"method", "seed", "objective", "rel_err", "violation", "outer_iterations",
                                     "subsolves", "stop"};
  if (include_time) header.push_back("cpu_seconds");
  Table table;
  table.text = join(header);
  table.warning = runs.empty();

  for (const auto& r : runs) {
    std::vector<std::string> row = {r.method,
                                    std::to_string(r.seed),
                                    format_sig(r.objective, kValueDigits),
                                    format_sig(r.rel_err, kValueDigits),
                                    format_sig(r.violation, kValueDigits),
                                    std::to_string(r.outer_iterations),
                                    std::to_string(r.subsolves),
                                    r.stop};
    if (include_time) row.push_back(format_sig(r.wall_seconds, kTimeDigits));
    table.text += join(row);
  }
  if (runs.size() >= 2) {
    double outer = 0.0, subsolves = 0.0;
    for (const auto& r : runs) {
      outer += r.outer_iterations;
      subsolves += r.subsolves;
    }
    const double count = static_cast<double>(runs.size());
    std::vector<std::string> row = {"mean",
                                    "-",
                                    format_sig(mean_of(runs, &RunSummary::objective), kValueDigits),
                                    format_sig(mean_of(runs, &RunSummary::rel_err), kValueDigits),
                                    format_sig(mean_of(runs, &RunSummary::violation), kValueDigits),
                                    format_sig(outer / count, kValueDigits),
                                    format_sig(subsolves / count, kValueDigits),
                                    "-"};
    if (include_time) row.push_back(format_sig(mean_of(runs, &RunSummary::wall_seconds), kTimeDigits));
    table.text += join(row);
  }
  return table;
}

std::string iterations_tsv(const SolveReport& report) {
  std::string out = join({"k", "rho", "x_norm", "objective", "merit", "violation", "rel_change", "eta", "sca_moves",
                          "subsolves", "sca_terminated", "lambda", "lambda_next"});
  auto vec_cell = [](const Vec& v) {
    if (v.size() == 0) return std::string("-");
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += format_sig(v[i], kValueDigits);
    }
    return s;
  };
  for (const auto& it : report.iterations) {
    out += join({std::to_string(it.k), format_sig(it.rho, kValueDigits), format_sig(it.x.norm(), kValueDigits),
                 format_sig(it.objective, kValueDigits), format_sig(it.merit, kValueDigits),
                 format_sig(it.violation, kValueDigits), format_sig(it.rel_change, kValueDigits),
                 format_sig(it.eta, kValueDigits), std::to_string(it.sca_iterations), std::to_string(it.subsolves),
                 it.sca_terminated ? "1" : "0", vec_cell(it.lambda), vec_cell(it.lambda_next)});
  }
  return out;
}

std::string aux_tsv(const ALReport& report) {
  std::string out = join({"k", "pair", "x_norm", "x0", "lambda", "merit", "residual", "gamma", "within_gamma",
                          "selected"});
  for (std::size_t k = 0; k < report.aux.size(); ++k) {
    const auto& table = report.aux[k];
    for (std::size_t e = 0; e < table.entries.size(); ++e) {
      const auto& entry = table.entries[e];
      std::string lambda;
      for (Eigen::Index i = 0; i < entry.lambda.size(); ++i) {
        if (i) lambda += ',';
        lambda += format_sig(entry.lambda[i], kValueDigits);
      }
      out += join({std::to_string(k), to_string(entry.index), format_sig(entry.x.norm(), kValueDigits),
                   format_sig(entry.x.size() ? entry.x[0] : 0.0, kValueDigits), lambda.empty() ? "-" : lambda,
                   format_sig(entry.merit, kValueDigits), format_sig(entry.residual, kValueDigits),
                   format_sig(table.gamma, kValueDigits), entry.within_gamma ? "1" : "0",
                   static_cast<int>(e) == table.selected ? "1" : "0"});
    }
  }
  return out;
}

std::string example_table_tsv(const ALReport& report) {
  std::string out = join({"k", "rho", "pair", "x_rho", "lambda", "merit_rho", "closed_x_rho", "closed_lambda",
                          "closed_merit_rho"});
  const auto sig = [](double v) { return format_sig(v, kValueDigits); };
  for (std::size_t k = 0; k < report.iterations.size() && k < report.aux.size(); ++k) {
    const OuterIteration& it = report.iterations[k];
    const ExampleRow row = example_4_1_closed_form(static_cast<int>(k));
    const AuxTable& table = report.aux[k];
    for (std::size_t e = 0; e < table.entries.size() && e < 4; ++e) {
      const AuxEntry& a = table.entries[e];
      out += join({std::to_string(k), sig(it.rho), to_string(a.index), sig(a.x[0] * it.rho), sig(a.lambda[0]),
                   sig(a.merit * it.rho), sig(row.x_rho[e]), sig(row.lambda[e]), sig(row.merit_rho[e])});
    }
    out += join({std::to_string(k), sig(it.rho), "-", sig(it.x[0] * it.rho), sig(it.lambda_next[0]), "-",
                 sig(row.xk_rho), sig(row.lambda_next), "-"});
  }
  return out;
}

}  // namespace dcopt
