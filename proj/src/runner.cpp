#include "dcopt/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace dcopt {

const char* to_string(Method method) {
  switch (method) {
    case Method::kPM1: return "pm1";
    case Method::kPM2: return "pm2";
    case Method::kALM: return "alm";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "pm1") return Method::kPM1;
  if (name == "pm2") return Method::kPM2;
  if (name == "alm") return Method::kALM;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + name + "' (expected pm1, pm2 or alm)");
}

const char* to_string(EtaKind kind) { return kind == EtaKind::kTight ? "tight" : "default"; }

EtaKind parse_eta_kind(const std::string& name) {
  if (name == "default") return EtaKind::kDefault;
  if (name == "tight") return EtaKind::kTight;
  throw Error(ErrorCode::kInvalidArgument, "unknown eta schedule '" + name + "'");
}

namespace {

EtaSchedule eta_schedule(EtaKind kind) {
  if (kind == EtaKind::kTight) return [](int, double rho) { return 1e-15 / rho; };
  return default_eta;
}

SCAConfig sca_config(const RunConfig& cfg) {
  SCAConfig sca;
  sca.subsolver.backend = cfg.backend;
  sca.parallel_pairs = cfg.parallel_pairs;
  return sca;
}

}  // namespace

PenaltyConfig RunConfig::penalty_config() const {
  PenaltyConfig c;
  c.eps = eps;
  c.rho0 = rho0;
  c.sigma = sigma;
  c.p = p();
  c.eta = eta_schedule(eta);
  c.outer_rel_tol = tol;
  c.max_outer = max_outer;
  c.rho_cap = rho_cap;
  c.sca = sca_config(*this);
  return c;
}

ALConfig RunConfig::al_config() const {
  ALConfig c;
  c.eps = eps;
  c.rho0 = rho0;
  c.sigma = sigma;
  c.alpha = alpha;
  c.eta = eta_schedule(eta);
  c.outer_rel_tol = tol;
  c.max_outer = max_outer;
  c.rho_cap = rho_cap;
  c.sca = sca_config(*this);
  c.aux_multipliers = aux_multipliers;
  c.aux_mode = aux_mode;
  return c;
}

void RunConfig::validate(int num_constraints) const {
  if (method == Method::kALM) {
    al_config().validate(num_constraints);
  } else {
    penalty_config().validate();
    if (aux_multipliers) throw Error(ErrorCode::kInvalidArgument, "auxiliary multipliers need --method alm");
  }
  if (!(rho_cap >= rho0)) throw Error(ErrorCode::kInvalidArgument, "rho cap below rho0");
}

std::string RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = to_string(method);
  if (std::isfinite(eps)) j["eps"] = eps;
  else j["eps"] = "inf";
  j["rho0"] = rho0;
  j["sigma"] = sigma;
  if (method == Method::kALM) j["alpha"] = alpha;
  else j["p"] = p();
  j["eta"] = eta == EtaKind::kTight ? "1e-15/rho" : "10^(-k-3)";
  j["delta"] = "10^(-t-1)";
  j["max_outer"] = max_outer;
  j["tol"] = tol;
  j["rho_cap"] = rho_cap;
  j["aux_multipliers"] = aux_multipliers;
  if (aux_multipliers) {
    j["aux_mode"] = to_string(aux_mode);
    j["gamma"] = "10/rho";
  }
  j["subsolver"] = to_string(backend);
  j["parallel_pairs"] = parallel_pairs;
  j["expected_stop"] = to_string(expected_stop);
  return j.dump(2);
}

RunConfig example_4_1_config() {
  RunConfig cfg;
  cfg.method = Method::kALM;
  cfg.eps = std::numeric_limits<double>::infinity();
  cfg.alpha = 1.0;
  cfg.eta = EtaKind::kTight;
  cfg.aux_multipliers = true;
  cfg.expected_stop = StopReason::kRhoCap;
  return cfg;
}

RunResult run_method(const DCProgram& prog, const RunConfig& cfg, const Vec& x0) {
  cfg.validate(prog.num_constraints());
  RunResult out;
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.method == Method::kALM) {
    out.report = al_solve(prog, cfg.al_config(), x0);
  } else {
    static_cast<SolveReport&>(out.report) = penalty_solve(prog, cfg.penalty_config(), x0);
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

bool stopped_as_expected(const RunConfig& cfg, const SolveReport& report) {
  if (report.stop == cfg.expected_stop) return true;
  return report.stop == StopReason::kUnconstrained && cfg.expected_stop == StopReason::kRelativeChange;
}

RunSummary summarize(const RunConfig& cfg, const InstanceData& data, const RunResult& result) {
  RunSummary s;
  s.method = to_string(cfg.method);
  s.seed = data.seed;
  s.objective = result.report.objective;
  s.violation = result.report.violation;
  s.outer_iterations = static_cast<int>(result.report.iterations.size());
  s.subsolves = result.report.total_subsolves;
  s.stop = to_string(result.report.stop);
  s.wall_seconds = result.wall_seconds;
  if (data.blocks.count("x_star") && result.report.x_final.size()) {
    const Vec x_star = data.block("x_star").col(0);
    s.rel_err = (result.report.x_final - x_star).norm() / x_star.norm();
  }
  return s;
}

MeritMode FinalState::mode() const {
  if (method == Method::kALM) return AlMode{lambda};
  return PenaltyMode{method == Method::kPM1 ? 1 : 2};
}

FinalState final_state(const RunConfig& cfg, const SolveReport& report) {
  if (report.iterations.empty()) throw Error(ErrorCode::kInvalidArgument, "run has no completed iteration");
  const OuterIteration& last = report.iterations.back();
  FinalState s;
  s.method = cfg.method;
  s.rho = last.rho;
  s.eta = last.eta;
  s.eps = cfg.eps;
  s.lambda = last.lambda;
  s.x = last.x;
  return s;
}

namespace {

std::string vector_line(const char* key, const Vec& v) {
  std::string out = std::string(key) + ' ' + std::to_string(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out += ' ' + format_double(v[i]);
  return out + '\n';
}

Vec read_vector(std::istringstream& in, const std::string& key) {
  long n = -1;
  if (!(in >> n) || n < 0) throw Error(ErrorCode::kParse, "final state: bad length for '" + key + "'");
  Vec v(n);
  for (long i = 0; i < n; ++i)
    if (!(in >> v[i])) throw Error(ErrorCode::kParse, "final state: '" + key + "' is truncated");
  return v;
}

}  // namespace

std::string serialize_final_state(const FinalState& state) {
  std::string out = "dcopt-final-state\n";
  out += std::string("method ") + to_string(state.method) + '\n';
  out += "rho " + format_double(state.rho) + '\n';
  out += "eta " + format_double(state.eta) + '\n';
  out += "eps " + format_double(state.eps) + '\n';
  out += vector_line("lambda", state.lambda);
  out += vector_line("x", state.x);
  return out;
}

FinalState parse_final_state(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  if (!(in >> word) || word != "dcopt-final-state") throw Error(ErrorCode::kParse, "not a final state file");
  FinalState s;
  bool seen_x = false, seen_rho = false;
  while (in >> word) {
    if (word == "method") {
      std::string m;
      in >> m;
      s.method = parse_method(m);
    } else if (word == "rho") {
      seen_rho = static_cast<bool>(in >> s.rho);
    } else if (word == "eta") {
      in >> s.eta;
    } else if (word == "eps") {
      std::string e;
      in >> e;
      s.eps = std::stod(e);
    } else if (word == "lambda") {
      s.lambda = read_vector(in, word);
    } else if (word == "x") {
      s.x = read_vector(in, word);
      seen_x = true;
    } else {
      throw Error(ErrorCode::kParse, "final state: unknown key '" + word + "'");
    }
  }
  if (!seen_rho) throw Error(ErrorCode::kParse, "final state: missing 'rho'");
  if (!seen_x) throw Error(ErrorCode::kParse, "final state: missing 'x'");
  return s;
}

Verification verify_state(const DCProgram& prog, const FinalState& state, int n_samples, std::uint64_t seed) {
  Verification v;
  v.inexact = verify_inexact_condition(prog, state.rho, state.mode(), state.x, state.eps, state.eta, n_samples, seed);
  v.kkt = kkt_report(prog, state.x, 1e-6, 1e-6);
  v.passed = v.inexact.worst_margin >= -kMarginTol;
  return v;
}

std::string verification_tsv(const Verification& v) {
  std::string out = "check\tpair\tvalue\n";
  for (const auto& p : v.inexact.pairs) {
    out += "inexact_margin\t" + to_string(p.index) + '\t' + format_sig(p.margin, 17) + '\n';
    out += "sample_margin\t" + to_string(p.index) + '\t' + format_sig(p.sample_margin, 17) + '\n';
  }
  for (const auto& p : v.kkt.pairs) {
    out += "kkt_stationarity\t" + to_string(p.index) + '\t' + format_sig(p.stationarity, 17) + '\n';
    out += "kkt_complementarity\t" + to_string(p.index) + '\t' + format_sig(p.complementarity, 17) + '\n';
  }
  out += "worst_margin\t-\t" + format_sig(v.inexact.worst_margin, 17) + '\n';
  out += "violation\t-\t" + format_sig(v.kkt.violation, 17) + '\n';
  out += std::string("kkt_residual_ok\t-\t") + (v.kkt.kkt_residual_ok ? "1" : "0") + '\n';
  out += std::string("passed\t-\t") + (v.passed ? "1" : "0") + '\n';
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

void write_run_dir(const std::string& dir, const RunConfig& cfg, const InstanceData& data, const RunResult& result,
                   const Verification* verification) {
  std::error_code ec;
  if (std::filesystem::exists(std::filesystem::path(dir) / "config.json"))
    throw Error(ErrorCode::kIo, "run directory '" + dir + "' already holds a run");
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir + "': " + ec.message());
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(cfg.to_json());
  auto& inst = j["instance"];
  inst["kind"] = to_string(data.kind);
  inst["seed"] = data.seed;
  for (const auto& [name, value] : data.params) inst["params"][name] = value;
  char checksum[17];
  std::snprintf(checksum, sizeof checksum, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_instance(data))));
  inst["checksum"] = checksum;
  j["stop"] = to_string(result.report.stop);
  if (!result.report.message.empty()) j["message"] = result.report.message;
  write_file(path("config.json"), j.dump(2) + '\n');

  write_file(path("iterations.tsv"), iterations_tsv(result.report));
  write_file(path("summary.tsv"), emit_table({summarize(cfg, data, result)}).text);
  if (!result.report.iterations.empty())
    write_file(path("final_state.txt"), serialize_final_state(final_state(cfg, result.report)));
  if (cfg.aux_multipliers) write_file(path("aux.tsv"), aux_tsv(result.report));
  if (verification) write_file(path("verify.tsv"), verification_tsv(*verification));
  write_file(path("timing.tsv"), "wall_seconds\n" + format_sig(result.wall_seconds, 3) + '\n');
}

}  // namespace dcopt
