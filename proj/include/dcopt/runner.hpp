#pragma once

// One solver run end to end: resolved configuration, dispatch to the penalty
// or AL method, the per-run report directory, and post-hoc verification.
//
// Run directory contents:
//   config.json       resolved configuration and instance metadata
//   iterations.tsv    one row per outer iteration
//   summary.tsv       emit_table() of the single run
//   final_state.txt   what `verify` needs: method, rho, eta, eps, lambda, x
//   aux.tsv           auxiliary multipliers (ALM with aux_multipliers only)
//   verify.tsv        inexact-condition margins and KKT residuals (when verified)
//   timing.tsv        wall time; the only file that differs between reruns

#include <string>

#include "dcopt/alm.hpp"
#include "dcopt/diagnostics.hpp"
#include "dcopt/problems.hpp"
#include "dcopt/report.hpp"

namespace dcopt {

enum class Method { kPM1, kPM2, kALM };

const char* to_string(Method method);
Method parse_method(const std::string& name);

enum class EtaKind {
  /// 10^(-k-3).
  kDefault,
  /// 1e-15 / rho: the worked example needs near-exact subproblem solutions.
  kTight,
};

const char* to_string(EtaKind kind);
EtaKind parse_eta_kind(const std::string& name);

struct RunConfig {
  Method method = Method::kPM2;
  double eps = 0.01;
  double rho0 = 0.1;
  double sigma = 2.0;
  double alpha = 1.05;
  int max_outer = 200;
  double tol = 1e-5;
  double rho_cap = 1e12;
  EtaKind eta = EtaKind::kDefault;
  bool aux_multipliers = false;
  AuxMode aux_mode = AuxMode::kPairRestricted;
  SubsolverBackend backend = SubsolverBackend::kAuto;
  bool parallel_pairs = false;
  /// The run succeeds only if it stops for this reason.
  StopReason expected_stop = StopReason::kRelativeChange;

  int p() const { return method == Method::kPM1 ? 1 : 2; }
  PenaltyConfig penalty_config() const;
  ALConfig al_config() const;
  /// Throws kInvalidArgument on any invalid parameter.
  void validate(int num_constraints) const;
  std::string to_json() const;
};

struct RunResult {
  ALReport report;
  double wall_seconds = 0.0;
};

/// ALM on the worked example with auxiliary multipliers, eps = inf, alpha = 1,
/// tight eta, run until the rho cap.
RunConfig example_4_1_config();

RunResult run_method(const DCProgram& prog, const RunConfig& cfg, const Vec& x0);

/// Stopped for the declared reason (an unconstrained program counts as a
/// relative-change stop).
bool stopped_as_expected(const RunConfig& cfg, const SolveReport& report);

RunSummary summarize(const RunConfig& cfg, const InstanceData& data, const RunResult& result);

/// The merit function of the last subproblem, and its approximate solution.
struct FinalState {
  Method method = Method::kPM2;
  double rho = 0.0;
  double eta = 0.0;
  double eps = 0.0;
  /// lambda^k of the last subproblem (ALM only).
  Vec lambda;
  Vec x;

  MeritMode mode() const;
};

/// Throws kInvalidArgument if the run has no completed iteration.
FinalState final_state(const RunConfig& cfg, const SolveReport& report);
std::string serialize_final_state(const FinalState& state);
FinalState parse_final_state(const std::string& text);

struct Verification {
  InexactReport inexact;
  KKTReport kkt;
  /// Worst margin >= -margin_tol.
  bool passed = false;
};

inline constexpr double kMarginTol = 1e-8;

Verification verify_state(const DCProgram& prog, const FinalState& state, int n_samples = 100,
                          std::uint64_t seed = 0);
std::string verification_tsv(const Verification& v);

/// Writes every report file into dir (created if missing). Runs are never
/// overwritten: a dir that already holds config.json is a kIo error.
void write_run_dir(const std::string& dir, const RunConfig& cfg, const InstanceData& data, const RunResult& result,
                   const Verification* verification = nullptr);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace dcopt
