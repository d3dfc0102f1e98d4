#pragma once

// Tab-separated result tables and per-run report files.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dcopt/alm.hpp"

namespace dcopt {

struct RunSummary {
  std::string method;
  std::uint64_t seed = 0;
  double objective = 0.0;
  /// ||x - x*|| / ||x*||; NaN when x* is unknown.
  double rel_err = std::numeric_limits<double>::quiet_NaN();
  double violation = 0.0;
  int outer_iterations = 0;
  int subsolves = 0;
  std::string stop;
  /// Only written when a table is asked to include times.
  double wall_seconds = std::numeric_limits<double>::quiet_NaN();
};

struct Table {
  std::string text;
  /// Set for an empty input: the table is a bare header.
  bool warning = false;
};

/// Header, one row per run, and a mean row when there are two or more runs.
/// Objectives and errors use 17 significant digits, times 3.
Table emit_table(const std::vector<RunSummary>& runs, bool include_time = false);

/// printf %.<digits>g, with "nan" / "inf" spelled consistently.
std::string format_sig(double v, int digits);

/// One row per outer iteration: k, rho, ||x||, objective, merit, violation,
/// rel_change, eta, SCA moves, subsolves, SCA terminated, then lambda^k and
/// lambda^{k+1} entries when present.
std::string iterations_tsv(const SolveReport& report);

/// Auxiliary multiplier tables, one row per (k, pair).
std::string aux_tsv(const ALReport& report);

/// The worked example's table: per k and pair, rho-scaled x and merit and the
/// multiplier next to their closed forms; pair "-" carries x^k and lambda^{k+1}.
std::string example_table_tsv(const ALReport& report);

}  // namespace dcopt
