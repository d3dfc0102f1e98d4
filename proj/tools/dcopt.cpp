// dcopt: generate instances, run the penalty and AL methods, verify results.
//
// Exit status: 0 when every run stopped for its declared reason and every
// requested verification passed, 1 on errors, 2 otherwise.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "dcopt/runner.hpp"

using namespace dcopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFailed = 2;

struct SolverFlags {
  std::string method = "pm2";
  double eps = 0.01;
  double rho0 = 0.1;
  double sigma = 2.0;
  double alpha = 1.05;
  int p = 0;
  int max_outer = 200;
  double tol = 1e-5;
  std::string subsolver = "auto";
  bool aux = false;
  bool parallel_pairs = false;

  void add_to(CLI::App* app, bool with_method) {
    if (with_method)
      app->add_option("--method", method, "pm1, pm2 or alm")->check(CLI::IsMember({"pm1", "pm2", "alm"}));
    app->add_option("--eps", eps, "epsilon of the active sets")->capture_default_str();
    app->add_option("--rho0", rho0, "initial penalty parameter")->capture_default_str();
    app->add_option("--sigma", sigma, "penalty growth factor")->capture_default_str();
    app->add_option("--alpha", alpha, "ALM exponent in rho >= ||lambda||^(1+alpha)")->capture_default_str();
    app->add_option("--p", p, "penalty power; must agree with --method")->check(CLI::IsMember({1, 2}));
    app->add_option("--max-outer", max_outer, "outer iteration limit")->capture_default_str();
    app->add_option("--tol", tol, "relative-change stopping tolerance")->capture_default_str();
    app->add_option("--subsolver", subsolver, "auto, dual, prox-gradient or subgradient")->capture_default_str();
    app->add_flag("--aux-multipliers", aux, "ALM: compute auxiliary multipliers");
    app->add_flag("--parallel-pairs", parallel_pairs, "solve the pairs of one SCA sweep concurrently");
  }

  RunConfig resolve(const std::string& method_name) const {
    RunConfig cfg;
    cfg.method = parse_method(method_name);
    if (p != 0) {
      if (cfg.method == Method::kALM) throw Error(ErrorCode::kInvalidArgument, "--p applies to pm1/pm2 only");
      if (p != cfg.p()) throw Error(ErrorCode::kInvalidArgument, "--p conflicts with --method " + method_name);
    }
    cfg.eps = eps;
    cfg.rho0 = rho0;
    cfg.sigma = sigma;
    cfg.alpha = alpha;
    cfg.max_outer = max_outer;
    cfg.tol = tol;
    cfg.backend = parse_backend(subsolver);
    cfg.aux_multipliers = aux;
    cfg.parallel_pairs = parallel_pairs;
    return cfg;
  }
};

void apply_thread_cap() {
  if (const char* env = std::getenv("DCOPT_THREADS")) {
    const int n = std::atoi(env);
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "DCOPT_THREADS must be a positive integer");
    omp_set_num_threads(n);
  }
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// gen

struct GenFlags {
  std::string kind = "quadratic-dc";
  int n = 50;
  int m = 256;
  int k = 20;
  double s = 0.1;
  double noise_variance = kDefaultNoiseVariance;
  std::uint64_t seed = 1;
  std::string out;
};

InstanceData generate(const std::string& kind, int n, int m, int k, double s, double noise, std::uint64_t seed) {
  switch (parse_instance_kind(kind)) {
    case InstanceKind::kExample41: return example_4_1_data();
    case InstanceKind::kQuadraticDC: return gen_quadratic_dc(n, seed);
    case InstanceKind::kSparseRecovery: return gen_sparse_recovery(m, n, k, s, seed, noise);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown kind");
}

int cmd_gen(const GenFlags& f) {
  const InstanceData data = generate(f.kind, f.n, f.m, f.k, f.s, f.noise_variance, f.seed);
  save_instance(data, f.out);
  std::printf("wrote %s (%s, seed %llu)\n", f.out.c_str(), to_string(data.kind),
              static_cast<unsigned long long>(data.seed));
  return kExitOk;
}

// solve

struct SolveFlags {
  SolverFlags solver;
  std::string instance;
  std::string out;
  bool verify = false;
  int samples = 100;
};

int cmd_solve(const SolveFlags& f) {
  const InstanceData data = load_instance(f.instance);
  const DCProgram prog = materialize(data);
  const RunConfig cfg = f.solver.resolve(f.solver.method);
  const RunResult result = run_method(prog, cfg, initial_point(data));

  Verification v;
  const bool do_verify = f.verify && !result.report.iterations.empty();
  if (do_verify) v = verify_state(prog, final_state(cfg, result.report), f.samples, data.seed);
  write_run_dir(f.out, cfg, data, result, do_verify ? &v : nullptr);

  std::cout << emit_table({summarize(cfg, data, result)}).text;
  if (!result.report.message.empty()) std::cerr << "solver: " << result.report.message << '\n';
  bool ok = stopped_as_expected(cfg, result.report);
  if (f.verify) {
    ok = ok && do_verify && v.passed;
    std::cerr << "verify: worst margin " << format_sig(v.inexact.worst_margin, 6) << (v.passed ? " ok" : " FAILED")
              << '\n';
  }
  return ok ? kExitOk : kExitFailed;
}

// verify

struct VerifyFlags {
  std::string instance;
  std::string run;
  int samples = 100;
  std::uint64_t seed = 0;
};

int cmd_verify(const VerifyFlags& f) {
  const InstanceData data = load_instance(f.instance);
  const DCProgram prog = materialize(data);
  const FinalState state = parse_final_state(read_file(join_path(f.run, "final_state.txt")));
  const Verification v = verify_state(prog, state, f.samples, f.seed);
  std::cout << verification_tsv(v);
  return v.passed ? kExitOk : kExitFailed;
}

// reproduce-example

int cmd_reproduce_example(const std::string& out) {
  const InstanceData data = example_4_1_data();
  const RunConfig cfg = example_4_1_config();
  const RunResult result = run_method(materialize(data), cfg, initial_point(data));
  write_run_dir(out, cfg, data, result);
  const std::string table = example_table_tsv(result.report);
  write_file(join_path(out, "table.tsv"), table);
  std::cout << table;
  if (!result.report.message.empty()) std::cerr << "solver: " << result.report.message << '\n';
  return stopped_as_expected(cfg, result.report) ? kExitOk : kExitFailed;
}

// reproduce-experiment

struct ExperimentFlags {
  SolverFlags solver;
  std::string experiment = "quadratic";
  std::vector<std::string> methods = {"pm1", "pm2", "alm"};
  int n = 0;
  int m = 256;
  int k = 20;
  double s = 0.1;
  double noise_variance = kDefaultNoiseVariance;
  std::uint64_t first_seed = 1;
  int seeds = 10;
  bool verify = false;
  bool times = false;
  std::string out;
};

int cmd_reproduce_experiment(const ExperimentFlags& f) {
  const bool sparse = f.experiment == "sparse";
  const int n = f.n > 0 ? f.n : (sparse ? 1024 : 50);
  for (const auto& name : f.methods) f.solver.resolve(name);

  struct Job {
    std::size_t method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < f.seeds; ++i)
    for (std::size_t mi = 0; mi < f.methods.size(); ++mi) jobs.push_back({mi, f.first_seed + static_cast<std::uint64_t>(i)});

  std::vector<InstanceData> instances(static_cast<std::size_t>(f.seeds));
  for (int i = 0; i < f.seeds; ++i) {
    const std::uint64_t seed = f.first_seed + static_cast<std::uint64_t>(i);
    instances[static_cast<std::size_t>(i)] = sparse ? gen_sparse_recovery(f.m, n, f.k, f.s, seed, f.noise_variance)
                                                    : gen_quadratic_dc(n, seed);
    std::filesystem::create_directories(join_path(f.out, "instances"));
    save_instance(instances[static_cast<std::size_t>(i)],
                  join_path(f.out, "instances/seed-" + std::to_string(seed) + ".txt"));
  }

  std::vector<RunSummary> summaries(jobs.size());
  std::vector<int> ok(jobs.size(), 0);
  std::vector<std::string> errors(jobs.size());
  const auto run = [&](std::size_t j) {
    try {
      const InstanceData& data = instances[jobs[j].seed - f.first_seed];
      const DCProgram prog = materialize(data);
      const RunConfig cfg = f.solver.resolve(f.methods[jobs[j].method]);
      const RunResult result = run_method(prog, cfg, initial_point(data));
      Verification v;
      const bool do_verify = f.verify && !result.report.iterations.empty();
      if (do_verify) v = verify_state(prog, final_state(cfg, result.report), 100, data.seed);
      write_run_dir(join_path(f.out, "runs/" + f.methods[jobs[j].method] + "-seed-" + std::to_string(data.seed)), cfg,
                    data, result, do_verify ? &v : nullptr);
      summaries[j] = summarize(cfg, data, result);
      ok[j] = stopped_as_expected(cfg, result.report) && (!f.verify || (do_verify && v.passed));
      if (!result.report.message.empty()) errors[j] = result.report.message;
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  };
  // Even an inactive outer region makes every kernel region nested, which is slow.
  if (omp_get_max_threads() > 1) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < jobs.size(); ++j) run(j);
  } else {
    for (std::size_t j = 0; j < jobs.size(); ++j) run(j);
  }

  std::string text;
  bool all_ok = true;
  for (std::size_t mi = 0; mi < f.methods.size(); ++mi) {
    std::vector<RunSummary> rows;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].method == mi && !summaries[j].method.empty()) rows.push_back(summaries[j]);
    const Table t = emit_table(rows, f.times);
    text += mi == 0 ? t.text : t.text.substr(t.text.find('\n') + 1);
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    all_ok = all_ok && ok[j];
    if (!errors[j].empty())
      std::cerr << f.methods[jobs[j].method] << " seed " << jobs[j].seed << ": " << errors[j] << '\n';
  }
  write_file(join_path(f.out, "table.tsv"), text);
  std::cout << text;
  return all_ok ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DC-constrained DC programs: penalty and augmented Lagrangian methods"};
  app.require_subcommand(1);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate and save an instance");
  gen_cmd->add_option("--kind", gen.kind, "example-4-1, quadratic-dc or sparse-recovery")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "dimension")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "sparse recovery: rows of A")->capture_default_str();
  gen_cmd->add_option("--K", gen.k, "sparse recovery: nonzeros of x*")->capture_default_str();
  gen_cmd->add_option("--s", gen.s, "sparse recovery: cap level")->capture_default_str();
  gen_cmd->add_option("--noise-variance", gen.noise_variance, "sparse recovery: noise variance")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "instance file")->required();

  SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "solve a saved instance");
  solve.solver.add_to(solve_cmd, true);
  solve_cmd->add_option("--instance", solve.instance, "instance file")->required();
  solve_cmd->add_option("--out", solve.out, "run directory")->required();
  solve_cmd->add_flag("--verify", solve.verify, "check the inexact stationarity condition at the result");
  solve_cmd->add_option("--samples", solve.samples, "random points per pair for --verify")->capture_default_str();

  VerifyFlags verify;
  auto* verify_cmd = app.add_subcommand("verify", "check a finished run");
  verify_cmd->add_option("--instance", verify.instance, "instance file")->required();
  verify_cmd->add_option("--run", verify.run, "run directory written by solve")->required();
  verify_cmd->add_option("--samples", verify.samples, "random points per pair")->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "sampling seed")->capture_default_str();

  std::string example_out;
  auto* example_cmd = app.add_subcommand("reproduce-example", "ALM iterates of the one-dimensional example");
  example_cmd->add_option("--out", example_out, "run directory")->required();

  ExperimentFlags exp;
  auto* exp_cmd = app.add_subcommand("reproduce-experiment", "seeded batch of runs with a summary table");
  exp.solver.add_to(exp_cmd, false);
  exp_cmd->add_option("--experiment", exp.experiment, "quadratic or sparse")
      ->check(CLI::IsMember({"quadratic", "sparse"}))
      ->capture_default_str();
  exp_cmd->add_option("--methods", exp.methods, "methods to run")->delimiter(',')->capture_default_str();
  exp_cmd->add_option("--n", exp.n, "dimension (default 50 quadratic, 1024 sparse)");
  exp_cmd->add_option("--m", exp.m, "sparse: rows of A")->capture_default_str();
  exp_cmd->add_option("--K", exp.k, "sparse: nonzeros of x*")->capture_default_str();
  exp_cmd->add_option("--s", exp.s, "sparse: cap level")->capture_default_str();
  exp_cmd->add_option("--noise-variance", exp.noise_variance, "sparse: noise variance")->capture_default_str();
  exp_cmd->add_option("--seed", exp.first_seed, "first seed")->capture_default_str();
  exp_cmd->add_option("--seeds", exp.seeds, "number of seeds")->capture_default_str();
  exp_cmd->add_flag("--verify", exp.verify, "verify every run");
  exp_cmd->add_flag("--times", exp.times, "add a cpu_seconds column (not reproducible)");
  exp_cmd->add_option("--out", exp.out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    apply_thread_cap();
    if (*gen_cmd) return cmd_gen(gen);
    if (*solve_cmd) return cmd_solve(solve);
    if (*verify_cmd) return cmd_verify(verify);
    if (*example_cmd) return cmd_reproduce_example(example_out);
    if (*exp_cmd) return cmd_reproduce_experiment(exp);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
