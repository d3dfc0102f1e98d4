#include "dcopt/problems.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "dcopt/rng.hpp"

namespace dcopt {

const char* to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::kExample41: return "example-4-1";
    case InstanceKind::kQuadraticDC: return "quadratic-dc";
    case InstanceKind::kSparseRecovery: return "sparse-recovery";
  }
  return "example-4-1";
}

InstanceKind parse_instance_kind(const std::string& name) {
  if (name == "example-4-1") return InstanceKind::kExample41;
  if (name == "quadratic-dc") return InstanceKind::kQuadraticDC;
  if (name == "sparse-recovery") return InstanceKind::kSparseRecovery;
  throw Error(ErrorCode::kParse, "unknown instance kind '" + name + "'");
}

const Mat& InstanceData::block(const std::string& name) const {
  const auto it = blocks.find(name);
  if (it == blocks.end()) throw Error(ErrorCode::kParse, "instance is missing block '" + name + "'");
  return it->second;
}

double InstanceData::param(const std::string& name) const {
  const auto it = params.find(name);
  if (it == params.end()) throw Error(ErrorCode::kParse, "instance is missing param '" + name + "'");
  return it->second;
}

namespace {

Vec column(const Mat& m) {
  if (m.cols() != 1) throw Error(ErrorCode::kParse, "expected a column block");
  return m.col(0);
}

Mat orthogonal_basis(Rng& rng, int n) {
  const Mat g = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Mat> qr(g);
  return qr.householderQ() * Mat::Identity(n, n);
}

Mat random_psd(Rng& rng, int n) {
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = rng.uniform(0.0, 20.0);
  const Mat u = orthogonal_basis(rng, n);
  Mat p = u * d.asDiagonal() * u.transpose();
  return 0.5 * (p + p.transpose());
}

Mat as_block(const Vec& v) { return Mat(v); }

Mat scalar_block(std::initializer_list<double> values) {
  Mat m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

const char* const kQuadMatrices[] = {"Q", "A1", "A2", "B11", "B12", "B21", "B22"};
const char* const kQuadVectors[] = {"q", "a1", "a2", "b11", "b12", "b21", "b22"};

DCProgram materialize_quadratic(const InstanceData& data) {
  const int n = static_cast<int>(data.param("n"));
  DCProgram prog;
  prog.n = n;
  prog.phi0 = SmoothConvexFn::quadratic(data.block("Q"), column(data.block("q")), 0.0);
  prog.zeta0 = NonsmoothConvexFn::zero();
  prog.psi0 = MaxSmoothFn{{SmoothConvexFn::constant(n, 0.0)}};
  const Vec c = column(data.block("c"));
  const Mat& d = data.block("d");
  if (c.size() != 2 || d.rows() != 2 || d.cols() != 2) throw Error(ErrorCode::kParse, "constant blocks must be 2 and 2x2");
  for (int i = 1; i <= 2; ++i) {
    const std::string si = std::to_string(i);
    ConstraintRow row;
    row.phi = SmoothConvexFn::quadratic(data.block("A" + si), column(data.block("a" + si)), c[i - 1]);
    row.zeta = NonsmoothConvexFn::zero();
    MaxSmoothFn psi;
    for (int j = 1; j <= 2; ++j) {
      const std::string sij = si + std::to_string(j);
      psi.pieces.push_back(
          SmoothConvexFn::quadratic(data.block("B" + sij), column(data.block("b" + sij)), d(i - 1, j - 1)));
    }
    row.psi = std::move(psi);
    prog.constraints.push_back(std::move(row));
  }
  for (const char* name : kQuadMatrices) {
    const Mat& m = data.block(name);
    if (m.rows() != n || m.cols() != n) throw Error(ErrorCode::kParse, std::string("block ") + name + " must be n x n");
  }
  for (const char* name : kQuadVectors) {
    if (data.block(name).rows() != n) throw Error(ErrorCode::kParse, std::string("block ") + name + " must have n rows");
  }
  return prog;
}

DCProgram materialize_sparse(const InstanceData& data) {
  const Mat& a = data.block("A");
  const Vec b = column(data.block("b"));
  const int n = static_cast<int>(a.cols());
  const double s = data.param("s");
  const double k = data.param("K");
  if (b.size() != a.rows()) throw Error(ErrorCode::kParse, "b must have m rows");
  DCProgram prog;
  prog.n = n;
  prog.phi0 = SmoothConvexFn::least_squares(a, b);
  prog.zeta0 = NonsmoothConvexFn::zero();
  prog.psi0 = MaxSmoothFn{{SmoothConvexFn::constant(n, 0.0)}};
  ConstraintRow row;
  row.phi = SmoothConvexFn::constant(n, -s * k);
  row.zeta = NonsmoothConvexFn::l1(1.0);
  row.psi = sparse_cap(n, s);
  prog.constraints.push_back(std::move(row));
  return prog;
}

void append_line(std::string& out, const std::string& line) {
  out += line;
  out += '\n';
}

}  // namespace

SeparableMaxFn sparse_cap(int n, double s) {
  SeparableMaxFn h;
  h.n = n;
  h.pieces = {ScalarPiece{0.0, 1.0, -s}, ScalarPiece{0.0, 0.0, 0.0}, ScalarPiece{0.0, -1.0, -s}};
  return h;
}

DCProgram example_4_1() {
  DCProgram prog;
  prog.n = 1;
  prog.phi0 = SmoothConvexFn::constant(1, 0.0);
  prog.zeta0 = NonsmoothConvexFn::l1(1.0);
  prog.psi0 = MaxSmoothFn{{SmoothConvexFn::affine(Vec::Constant(1, 6.0), 0.0), SmoothConvexFn::affine(Vec::Constant(1, 1.0), 0.0)}};
  ConstraintRow row;
  row.phi = SmoothConvexFn::affine(Vec::Constant(1, 2.0), 0.0);
  row.zeta = NonsmoothConvexFn::zero();
  row.psi = MaxSmoothFn{{SmoothConvexFn::affine(Vec::Constant(1, -1.0), 0.0), SmoothConvexFn::affine(Vec::Constant(1, 1.0), 0.0)}};
  prog.constraints.push_back(std::move(row));
  return normalize_l0(std::move(prog));
}

InstanceData example_4_1_data() {
  InstanceData data;
  data.kind = InstanceKind::kExample41;
  data.params["n"] = 1;
  data.blocks["x0"] = Mat::Zero(1, 1);
  return data;
}

InstanceData gen_quadratic_dc(int n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "quadratic instance needs n >= 2");
  Rng rng(seed);
  InstanceData data;
  data.kind = InstanceKind::kQuadraticDC;
  data.seed = seed;
  data.params["n"] = n;
  for (const char* name : kQuadMatrices) data.blocks[name] = random_psd(rng, n);
  for (const char* name : kQuadVectors) data.blocks[name] = as_block(rng.normal_vector(n));
  const double c1 = rng.normal();
  const double c2 = rng.normal();
  data.blocks["c"] = scalar_block({c1, c2});
  Mat d(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) d(i, j) = rng.normal();
  data.blocks["d"] = d;
  data.blocks["x0"] = as_block(rng.normal_vector(n));
  return data;
}

Vec project_l1_ball(const Vec& v, double radius) {
  if (!(radius >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "l1 radius must be >= 0");
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - radius) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = v[i] >= 0.0 ? mag : -mag;
  }
  return out;
}

Vec l1_ball_least_squares(const Mat& a, const Vec& b, double radius, int max_iterations) {
  const double lip = 2.0 * (a * a.transpose()).selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
  Vec x = Vec::Zero(a.cols());
  Vec y = x;
  double t = 1.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Vec grad = 2.0 * a.transpose() * (a * y - b);
    const Vec x_next = project_l1_ball(y - grad / lip, radius);
    const double step = (x_next - x).norm();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((y - x_next).dot(x_next - x) > 0.0) {
      y = x_next;
      t = 1.0;
    } else {
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      t = t_next;
    }
    x = x_next;
    if (step <= 1e-13 * (1.0 + x.norm())) break;
  }
  return x;
}

InstanceData gen_sparse_recovery(int m, int n, int k, double s, std::uint64_t seed, double noise_variance) {
  if (m < 1 || n < 1 || m > n) throw Error(ErrorCode::kInvalidArgument, "need 1 <= m <= n");
  if (k < 1 || k > n) throw Error(ErrorCode::kInvalidArgument, "need 1 <= K <= n");
  if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "s must be positive");
  if (!(noise_variance >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise variance must be >= 0");
  Rng rng(seed);
  InstanceData data;
  data.kind = InstanceKind::kSparseRecovery;
  data.seed = seed;
  data.params["m"] = m;
  data.params["n"] = n;
  data.params["K"] = k;
  data.params["s"] = s;
  data.params["noise_variance"] = noise_variance;

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
    std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
  }
  Vec x_star = Vec::Zero(n);
  for (int i = 0; i < k; ++i) x_star[perm[static_cast<std::size_t>(i)]] = rng.uniform() < 0.5 ? -1.0 : 1.0;

  const Mat g = rng.normal_matrix(m, n);
  Eigen::HouseholderQR<Mat> qr(g.transpose());
  const Mat a = (qr.householderQ() * Mat::Identity(n, m)).transpose();
  Vec xi(m);
  for (int i = 0; i < m; ++i) xi[i] = std::sqrt(noise_variance) * rng.normal();
  const Vec b = a * x_star + xi;

  data.blocks["A"] = a;
  data.blocks["b"] = as_block(b);
  data.blocks["x_star"] = as_block(x_star);
  data.blocks["x0"] = as_block(l1_ball_least_squares(a, b, s * k));
  return data;
}

ExampleRow example_4_1_closed_form(int k) {
  if (k == 0) return {{5.0 / 9, 5.0, 0.0, 0.0}, {5.0 / 3, 5.0, 0.0, 0.0}, {-425.0 / 162, -12.5, 0.0, 0.0}, 5.0, 5.0};
  if (k % 2 == 1)
    return {{-8.0 / 9, 0.0, -13.0 / 9, -3.0},
            {7.0 / 3, 5.0, 2.0 / 3, 2.0},
            {-8.0, 0.0, -169.0 / 18, -6.5},
            -13.0 / 9,
            2.0 / 3};
  return {{1.0 / 3, 13.0 / 3, 0.0, 0.0}, {5.0 / 3, 5.0, 2.0 / 3, 2.0 / 3}, {-25.0 / 18, -169.0 / 18, 0.0, 0.0},
          13.0 / 3, 5.0};
}

DCProgram materialize(const InstanceData& data) {
  switch (data.kind) {
    case InstanceKind::kExample41: return example_4_1();
    case InstanceKind::kQuadraticDC: return materialize_quadratic(data);
    case InstanceKind::kSparseRecovery: return materialize_sparse(data);
  }
  throw Error(ErrorCode::kParse, "unknown instance kind");
}

Vec initial_point(const InstanceData& data) { return column(data.block("x0")); }

// ----------------------------------------------------------------- file IO

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string serialize_instance(const InstanceData& data) {
  std::string out;
  append_line(out, "dcopt-instance");
  append_line(out, "version " + std::to_string(kInstanceFormatVersion));
  append_line(out, std::string("kind ") + to_string(data.kind));
  append_line(out, "seed " + std::to_string(data.seed));
  for (const auto& [name, value] : data.params) append_line(out, "param " + name + " " + format_double(value));
  for (const auto& [name, m] : data.blocks) {
    append_line(out, "block " + name + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::string line;
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) line += ' ';
        line += format_double(m(i, j));
      }
      append_line(out, line);
    }
  }
  append_line(out, "end");
  char buf[32];
  std::snprintf(buf, sizeof buf, "checksum %016" PRIx64, fnv1a64(out));
  append_line(out, buf);
  return out;
}

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& text) : text_(text) {}

  bool next(std::string& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    if (end == std::string::npos) {
      line = text_.substr(pos_);
      pos_ = text_.size();
    } else {
      line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
    }
    ++number_;
    return true;
  }

  std::string expect(const std::string& what) {
    std::string line;
    if (!next(line)) throw Error(ErrorCode::kParse, "truncated instance: missing " + what);
    return line;
  }

  std::size_t position() const { return pos_; }
  int number() const { return number_; }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int number_ = 0;
};

std::vector<std::string> required_blocks(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::kExample41: return {"x0"};
    case InstanceKind::kQuadraticDC:
      return {"A1", "A2", "B11", "B12", "B21", "B22", "Q", "a1", "a2", "b11", "b12", "b21", "b22", "c", "d", "q", "x0"};
    case InstanceKind::kSparseRecovery: return {"A", "b", "x0", "x_star"};
  }
  return {};
}

double parse_number(const std::string& token, int line) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size())
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bad number '" + token + "'");
  return v;
}

}  // namespace

InstanceData parse_instance(const std::string& text) {
  LineReader reader(text);
  if (reader.expect("header") != "dcopt-instance") throw Error(ErrorCode::kParse, "not a dcopt instance file");

  std::istringstream version(reader.expect("section 'version'"));
  std::string word;
  int v = 0;
  if (!(version >> word >> v) || word != "version") throw Error(ErrorCode::kParse, "malformed section 'version'");
  if (v != kInstanceFormatVersion)
    throw Error(ErrorCode::kVersionMismatch, "instance format version " + std::to_string(v) + ", expected " +
                                                 std::to_string(kInstanceFormatVersion));

  InstanceData data;
  std::istringstream kind(reader.expect("section 'kind'"));
  std::string kind_name;
  if (!(kind >> word >> kind_name) || word != "kind") throw Error(ErrorCode::kParse, "malformed section 'kind'");
  data.kind = parse_instance_kind(kind_name);

  std::istringstream seed(reader.expect("section 'seed'"));
  if (!(seed >> word >> data.seed) || word != "seed") throw Error(ErrorCode::kParse, "malformed section 'seed'");

  bool ended = false;
  std::string line;
  std::size_t body_end = 0;
  while (reader.next(line)) {
    std::istringstream in(line);
    in >> word;
    if (word == "param") {
      std::string name, value;
      if (!(in >> name >> value)) throw Error(ErrorCode::kParse, "malformed param line " + std::to_string(reader.number()));
      data.params[name] = parse_number(value, reader.number());
    } else if (word == "block") {
      std::string name;
      long rows = 0, cols = 0;
      if (!(in >> name >> rows >> cols) || rows < 0 || cols < 0)
        throw Error(ErrorCode::kParse, "malformed block header line " + std::to_string(reader.number()));
      Mat m(rows, cols);
      for (long i = 0; i < rows; ++i) {
        std::istringstream row(reader.expect("rows of block '" + name + "'"));
        for (long j = 0; j < cols; ++j) {
          std::string token;
          if (!(row >> token)) throw Error(ErrorCode::kParse, "block '" + name + "' row " + std::to_string(i) + " is short");
          m(i, j) = parse_number(token, reader.number());
        }
      }
      data.blocks[name] = std::move(m);
    } else if (word == "end") {
      ended = true;
      body_end = reader.position();
      break;
    } else {
      throw Error(ErrorCode::kParse, "unexpected line " + std::to_string(reader.number()) + ": '" + line + "'");
    }
  }
  if (!ended) {
    for (const auto& name : required_blocks(data.kind)) {
      if (!data.blocks.count(name)) throw Error(ErrorCode::kParse, "truncated instance: missing block '" + name + "'");
    }
    throw Error(ErrorCode::kParse, "truncated instance: missing section 'end'");
  }

  std::istringstream check(reader.expect("section 'checksum'"));
  std::string hex;
  if (!(check >> word >> hex) || word != "checksum") throw Error(ErrorCode::kParse, "malformed section 'checksum'");
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(text.substr(0, body_end)));
  if (hex != buf) throw Error(ErrorCode::kChecksum, "checksum mismatch: file says " + hex + ", content hashes to " + buf);

  // Presence and shape checks happen here so that loading fails early.
  if (data.kind != InstanceKind::kExample41) (void)materialize(data);
  (void)data.block("x0");
  return data;
}

void save_instance(const InstanceData& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << serialize_instance(data);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

InstanceData load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

}  // namespace dcopt
