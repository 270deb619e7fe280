#include "nsopt/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "nsopt/error.hpp"

namespace nsopt {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }
[[noreturn]] void mismatch(const std::string& what) { throw Error(ErrorCode::DimensionMismatch, what); }

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::LassoL1: return "lasso-l1";
    case Family::LassoL2: return "lasso-l2";
    case Family::MaxCutDual: return "maxcut";
    case Family::FaultDiag: return "fault-diag";
    case Family::L1Mpc: return "mpc";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::LassoL1, Family::LassoL2, Family::MaxCutDual, Family::FaultDiag, Family::L1Mpc}) {
    if (to_string(f) == name) return f;
  }
  invalid("unknown problem family '" + std::string(name) + "'");
}

const Matrix& ProblemInstance::matrix(const std::string& key) const {
  auto it = matrices.find(key);
  if (it == matrices.end()) invalid("instance '" + name + "' has no matrix '" + key + "'");
  return it->second;
}

const Vector& ProblemInstance::vector(const std::string& key) const {
  auto it = vectors.find(key);
  if (it == vectors.end()) invalid("instance '" + name + "' has no vector '" + key + "'");
  return it->second;
}

double ProblemInstance::weight(const std::string& key) const {
  auto it = weights.find(key);
  if (it == weights.end()) invalid("instance '" + name + "' has no weight '" + key + "'");
  return it->second;
}

std::size_t ProblemInstance::dim() const {
  switch (family) {
    case Family::LassoL1:
    case Family::LassoL2: return matrix("B").cols();
    case Family::MaxCutDual: return matrix("C").rows();
    case Family::FaultDiag: return matrix("H").cols();
    case Family::L1Mpc: return matrix("P").rows();
  }
  return 0;
}

// ---------------------------------------------------------------- generators

ProblemInstance gen_lasso(const LassoOptions& o) {
  if (o.n < 1 || o.m < 1) invalid("lasso needs n, m >= 1");
  if (!(o.eta >= 0.0)) invalid("lasso needs eta >= 0");
  if (!(o.noise_std >= 0.0)) invalid("lasso needs noise_std >= 0");
  Rng rng(o.seed);
  Matrix b_mat = gaussian(rng, o.m, o.n);
  if (o.correlated) {
    for (std::size_t j = 0; j + 1 < o.n; ++j)
      for (std::size_t i = 0; i < o.m; ++i) b_mat(i, j + 1) += 0.5 * b_mat(i, j);
  }
  Vector x_nat = gaussian_vector(rng, o.n);
  Vector b = b_mat * x_nat;
  if (o.noise_std > 0.0) axpy(o.noise_std, gaussian_vector(rng, o.m), b);

  ProblemInstance inst;
  inst.family = o.norm == ResidualNorm::L1 ? Family::LassoL1 : Family::LassoL2;
  inst.name = std::string(to_string(inst.family)) + "-n" + std::to_string(o.n) + "-m" + std::to_string(o.m) +
              (o.correlated ? "-corr" : "") + "-s" + std::to_string(o.seed);
  inst.seed = o.seed;
  inst.params = {{"n", static_cast<double>(o.n)},
                 {"m", static_cast<double>(o.m)},
                 {"correlated", o.correlated ? 1.0 : 0.0},
                 {"noise_std", o.noise_std}};
  inst.weights = {{"eta", o.eta}};
  inst.curvature = spectral_norm_sq(b_mat);
  inst.lipschitz_sq = o.norm == ResidualNorm::L1 ? static_cast<double>(o.m) : 1.0;
  inst.matrices.emplace("B", std::move(b_mat));
  inst.vectors.emplace("b", std::move(b));
  inst.vectors.emplace("x_natural", std::move(x_nat));
  return inst;
}

ProblemInstance gen_maxcut(std::size_t n, std::uint64_t seed, MaxCutReg reg, double eta) {
  if (n < 2) invalid("maxcut needs n >= 2");
  if (!(eta >= 0.0)) invalid("maxcut needs eta >= 0");
  Rng rng(seed);
  const Matrix g = gaussian(rng, n, n);
  Matrix c = gram(g);
  c *= 1.0 / spectral_norm_sq(g);

  ProblemInstance inst;
  inst.family = Family::MaxCutDual;
  inst.name = "maxcut-n" + std::to_string(n) + "-s" + std::to_string(seed);
  inst.seed = seed;
  inst.params = {{"n", static_cast<double>(n)}};
  inst.labels = {{"reg", reg == MaxCutReg::L1 ? "l1" : "squared_l2"}};
  inst.weights = {{"eta", eta}};
  inst.curvature = 1.0;
  inst.lipschitz_sq = 2.0 * std::log(static_cast<double>(n));
  inst.matrices.emplace("C", std::move(c));
  return inst;
}

ProblemInstance gen_fault_diag(const FaultDiagOptions& o) {
  if (!(o.length > o.lag) || o.lag < 1) invalid("fault diagnosis needs T > L >= 1");
  if (!(o.tau >= 0.0) || !(o.lambda >= 0.0)) invalid("fault diagnosis needs tau, lambda >= 0");
  std::size_t rows = o.rows;
  if (rows == 0) {
    rows = 1;
    for (std::size_t r = 1; r * r <= o.lag; ++r)
      if (o.lag % r == 0) rows = r;
  }
  if (o.lag % rows != 0) invalid("low-rank rows must divide L");
  const std::size_t cols = o.lag / rows;
  const std::size_t sparse = o.sparse_len == 0 ? o.lag : o.sparse_len;
  const std::size_t n = o.lag + sparse;

  Rng rng(o.seed);
  // input record driving the Toeplitz data matrix
  const Vector u = gaussian_vector(rng, o.length + n - 1);
  Matrix h(o.length, n);
  for (std::size_t i = 0; i < o.length; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = u[i + n - 1 - j];

  // second-order impulse response: two real poles give a rank-2 reshape
  const double c1 = rng.normal();
  const double c2 = rng.normal();
  Vector x_true(n);
  for (std::size_t k = 0; k < o.lag; ++k) {
    const auto kk = static_cast<double>(k);
    x_true[k] = c1 * std::pow(0.8, kk) + c2 * std::pow(-0.5, kk);
  }
  const std::size_t faults = std::min(o.faults, sparse);
  std::vector<std::size_t> slots(sparse);
  for (std::size_t i = 0; i < sparse; ++i) slots[i] = i;
  for (std::size_t i = 0; i < faults; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (sparse - i));
    std::swap(slots[i], slots[j]);
    const double v = rng.normal();
    x_true[o.lag + slots[i]] = v + (v >= 0.0 ? 1.0 : -1.0);
  }
  Vector y = h * x_true;
  if (o.noise_std > 0.0) axpy(o.noise_std, gaussian_vector(rng, o.length), y);

  ProblemInstance inst;
  inst.family = Family::FaultDiag;
  inst.name = "fault-diag-T" + std::to_string(o.length) + "-L" + std::to_string(o.lag) + "-s" + std::to_string(o.seed);
  inst.seed = o.seed;
  inst.params = {{"T", static_cast<double>(o.length)},
                 {"L", static_cast<double>(o.lag)},
                 {"rows", static_cast<double>(rows)},
                 {"cols", static_cast<double>(cols)},
                 {"sparse_len", static_cast<double>(sparse)},
                 {"faults", static_cast<double>(faults)},
                 {"noise_std", o.noise_std}};
  inst.weights = {{"tau", o.tau}, {"lambda", o.lambda}};
  std::vector<std::size_t> low(o.lag), sp(sparse);
  for (std::size_t i = 0; i < o.lag; ++i) low[i] = i;
  for (std::size_t i = 0; i < sparse; ++i) sp[i] = o.lag + i;
  inst.indices = {{"low_rank", std::move(low)}, {"sparse", std::move(sp)}};
  inst.curvature = spectral_norm_sq(h);
  inst.lipschitz_sq = o.lambda * o.lambda * static_cast<double>(sparse);
  inst.matrices.emplace("H", std::move(h));
  inst.vectors.emplace("y", std::move(y));
  inst.vectors.emplace("x_true", std::move(x_true));
  return inst;
}

ProblemInstance gen_mpc(const MpcOptions& o) {
  Matrix a = o.a;
  Matrix b = o.b;
  if (a.size() == 0 && b.size() == 0) {
    a = Matrix{{1.0, o.dt}, {0.0, 1.0}};
    b = Matrix{{0.5 * o.dt * o.dt}, {o.dt}};
  }
  const std::size_t ns = a.rows();
  if (ns == 0 || a.cols() != ns) mismatch("MPC state matrix must be square");
  if (b.rows() != ns || b.cols() == 0) mismatch("MPC input matrix must have one row per state");
  const std::size_t ni = b.cols();
  const std::size_t hz = o.horizon;
  if (hz < 1) invalid("MPC horizon must be >= 1");
  if (!(o.lambda >= 0.0)) invalid("MPC needs lambda >= 0");
  const Matrix q = o.q.size() == 0 ? Matrix::identity(ns) : o.q;
  if (q.rows() != ns || q.cols() != ns) mismatch("MPC state weight must be n x n");
  if (q.max_asymmetry() > kSymmetryTolerance) throw Error(ErrorCode::NonSymmetric, "MPC state weight");
  Vector x0 = o.x0;
  if (x0.empty()) {
    x0 = Vector(ns);
    x0[0] = 1.0;
  }
  const Vector x_ref = o.x_ref.empty() ? Vector(ns) : o.x_ref;
  const Vector u_prev = o.u_prev.empty() ? Vector(ni) : o.u_prev;
  const Vector u_min = o.u_min.empty() ? Vector(ni, -1.0) : o.u_min;
  const Vector u_max = o.u_max.empty() ? Vector(ni, 1.0) : o.u_max;
  if (x0.size() != ns || x_ref.size() != ns) mismatch("MPC x0 / x_ref must have one entry per state");
  if (u_prev.size() != ni || u_min.size() != ni || u_max.size() != ni) mismatch("MPC input vectors have wrong length");
  for (std::size_t i = 0; i < ni; ++i) {
    if (u_min[i] > u_max[i]) throw Error(ErrorCode::InvertedBounds, "u_min > u_max at input " + std::to_string(i));
  }

  // stacked prediction x_i = A^i x0 + sum_{j<i} A^{i-1-j} B u_j, i = 1..H
  const std::size_t nu = hz * ni;
  Matrix gamma_map(hz * ns, nu);
  Vector free_resp(hz * ns);
  std::vector<Matrix> a_pow{Matrix::identity(ns)};
  for (std::size_t i = 1; i <= hz; ++i) a_pow.push_back(a * a_pow.back());
  for (std::size_t i = 1; i <= hz; ++i) {
    const Vector xi = a_pow[i] * x0 - x_ref;
    for (std::size_t r = 0; r < ns; ++r) free_resp[(i - 1) * ns + r] = xi[r];
    for (std::size_t j = 0; j < i; ++j) {
      const Matrix blk = a_pow[i - 1 - j] * b;
      for (std::size_t r = 0; r < ns; ++r)
        for (std::size_t c = 0; c < ni; ++c) gamma_map((i - 1) * ns + r, j * ni + c) = blk(r, c);
    }
  }
  Matrix q_bar(hz * ns, hz * ns);
  for (std::size_t i = 0; i < hz; ++i)
    for (std::size_t r = 0; r < ns; ++r)
      for (std::size_t c = 0; c < ns; ++c) q_bar(i * ns + r, i * ns + c) = q(r, c);

  const Matrix qg = q_bar * gamma_map;
  Matrix p = 2.0 * (gamma_map.transpose() * qg);
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = i + 1; j < nu; ++j) p(i, j) = p(j, i) = 0.5 * (p(i, j) + p(j, i));
  Vector lin = 2.0 * multiply_transposed(qg, free_resp);
  const Vector e0 = x0 - x_ref;
  const double r0 = dot(free_resp, q_bar * free_resp) + dot(e0, q * e0);

  Matrix d(nu, nu);
  Vector d0(nu);
  for (std::size_t i = 0; i < hz; ++i) {
    for (std::size_t c = 0; c < ni; ++c) {
      d(i * ni + c, i * ni + c) = 1.0;
      if (i > 0) d(i * ni + c, (i - 1) * ni + c) = -1.0;
    }
  }
  for (std::size_t c = 0; c < ni; ++c) d0[c] = u_prev[c];
  Vector lo(nu), hi(nu);
  for (std::size_t i = 0; i < hz; ++i)
    for (std::size_t c = 0; c < ni; ++c) {
      lo[i * ni + c] = u_min[c];
      hi[i * ni + c] = u_max[c];
    }

  ProblemInstance inst;
  inst.family = Family::L1Mpc;
  inst.name = "mpc-H" + std::to_string(hz) + "-n" + std::to_string(ns) + "-m" + std::to_string(ni);
  inst.seed = 0;
  inst.params = {{"horizon", static_cast<double>(hz)},
                 {"states", static_cast<double>(ns)},
                 {"inputs", static_cast<double>(ni)},
                 {"r", r0}};
  inst.weights = {{"lambda", o.lambda}};
  inst.curvature = spectral_norm_sq(d);
  inst.lipschitz_sq = o.lambda * o.lambda * static_cast<double>(nu);
  inst.matrices = {{"A", a}, {"B", b}, {"Q", q}, {"P", std::move(p)}, {"D", std::move(d)}};
  inst.vectors = {{"q", std::move(lin)}, {"d0", std::move(d0)}, {"lo", std::move(lo)}, {"hi", std::move(hi)},
                  {"x0", x0}, {"x_ref", x_ref}, {"u_prev", u_prev}};
  return inst;
}

// ---------------------------------------------------------------- validation

namespace {

void expect_dims(const Matrix& m, std::size_t r, std::size_t c, const std::string& what) {
  if (m.rows() != r || m.cols() != c) {
    mismatch(what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
             std::to_string(r) + "x" + std::to_string(c));
  }
}

void expect_len(const Vector& v, std::size_t n, const std::string& what) {
  if (v.size() != n) mismatch(what + " has length " + std::to_string(v.size()) + ", expected " + std::to_string(n));
}

void expect_close(double stored, double actual, const std::string& what) {
  if (!(std::abs(stored - actual) <= 1e-6 * std::max(1.0, std::abs(actual)))) {
    invalid(what + " recorded as " + std::to_string(stored) + " but data gives " + std::to_string(actual));
  }
}

}  // namespace

void validate(const ProblemInstance& inst) {
  for (const auto& [k, w] : inst.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) invalid("weight '" + k + "' must be finite and >= 0");
  }
  for (const auto& [k, m] : inst.matrices) require_finite(m, k.c_str());
  switch (inst.family) {
    case Family::LassoL1:
    case Family::LassoL2: {
      const Matrix& b_mat = inst.matrix("B");
      if (b_mat.rows() == 0 || b_mat.cols() == 0) mismatch("B is empty");
      require_finite(inst.vector("b"), "b");
      expect_len(inst.vector("b"), b_mat.rows(), "b");
      inst.weight("eta");
      expect_close(inst.curvature, spectral_norm_sq(b_mat), "L_A");
      expect_close(inst.lipschitz_sq,
                   inst.family == Family::LassoL1 ? static_cast<double>(b_mat.rows()) : 1.0, "L_f^2");
      break;
    }
    case Family::MaxCutDual: {
      const Matrix& c = inst.matrix("C");
      if (c.rows() < 2) mismatch("C must be at least 2x2");
      expect_dims(c, c.rows(), c.rows(), "C");
      if (c.max_asymmetry() > kSymmetryTolerance) throw Error(ErrorCode::NonSymmetric, "C");
      inst.weight("eta");
      auto reg = inst.labels.find("reg");
      if (reg == inst.labels.end() || (reg->second != "l1" && reg->second != "squared_l2")) {
        invalid("maxcut instance needs reg = l1 | squared_l2");
      }
      expect_close(inst.curvature, 1.0, "L_A");
      expect_close(inst.lipschitz_sq, 2.0 * std::log(static_cast<double>(c.rows())), "L_f^2");
      break;
    }
    case Family::FaultDiag: {
      const Matrix& h = inst.matrix("H");
      const std::size_t n = h.cols();
      expect_len(inst.vector("y"), h.rows(), "y");
      require_finite(inst.vector("y"), "y");
      auto low = inst.indices.find("low_rank");
      auto sp = inst.indices.find("sparse");
      if (low == inst.indices.end() || sp == inst.indices.end()) invalid("fault instance needs selector indices");
      std::vector<int> seen(n, 0);
      for (auto i : low->second) {
        if (i >= n) mismatch("low-rank selector out of range");
        ++seen[i];
      }
      for (auto i : sp->second) {
        if (i >= n) mismatch("sparse selector out of range");
        ++seen[i];
      }
      if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
        invalid("selectors must partition the decision vector");
      }
      const auto rows = static_cast<std::size_t>(inst.params.at("rows"));
      const auto cols = static_cast<std::size_t>(inst.params.at("cols"));
      if (rows * cols != low->second.size()) mismatch("low-rank reshape does not match selector");
      expect_close(inst.curvature, spectral_norm_sq(h), "L_A");
      const double lam = inst.weight("lambda");
      inst.weight("tau");
      expect_close(inst.lipschitz_sq, lam * lam * static_cast<double>(sp->second.size()), "L_f^2");
      break;
    }
    case Family::L1Mpc: {
      const Matrix& p = inst.matrix("P");
      const std::size_t nu = p.rows();
      expect_dims(p, nu, nu, "P");
      if (p.max_asymmetry() > kSymmetryTolerance) throw Error(ErrorCode::NonSymmetric, "P");
      expect_dims(inst.matrix("D"), nu, nu, "D");
      expect_len(inst.vector("q"), nu, "q");
      expect_len(inst.vector("d0"), nu, "d0");
      const Vector& lo = inst.vector("lo");
      const Vector& hi = inst.vector("hi");
      expect_len(lo, nu, "lo");
      expect_len(hi, nu, "hi");
      for (std::size_t i = 0; i < nu; ++i) {
        if (lo[i] > hi[i]) throw Error(ErrorCode::InvertedBounds, "lo > hi at index " + std::to_string(i));
      }
      if (inst.params.find("r") == inst.params.end()) invalid("MPC instance needs constant r");
      expect_close(inst.curvature, spectral_norm_sq(inst.matrix("D")), "L_A");
      const double lam = inst.weight("lambda");
      expect_close(inst.lipschitz_sq, lam * lam * static_cast<double>(nu), "L_f^2");
      break;
    }
  }
}

std::unique_ptr<Objective> make_objective(const ProblemInstance& inst) {
  validate(inst);
  switch (inst.family) {
    case Family::LassoL1:
    case Family::LassoL2: {
      ResidualPart rp{inst.matrix("B"), inst.vector("b"), 1.0,
                      inst.family == Family::LassoL1 ? ResidualNorm::L1 : ResidualNorm::L2};
      return std::make_unique<CompositeObjective>(inst.dim(), std::nullopt, std::move(rp),
                                                  ProxTerm::l1(inst.weight("eta")));
    }
    case Family::MaxCutDual: {
      const double eta = inst.weight("eta");
      ProxTerm h = inst.labels.at("reg") == "l1" ? ProxTerm::l1(eta) : ProxTerm::squared_l2(eta);
      return std::make_unique<SpectralObjective>(inst.matrix("C"), std::move(h));
    }
    case Family::FaultDiag: {
      const Matrix& h = inst.matrix("H");
      const Vector& y = inst.vector("y");
      QuadraticPart quad{gram(h), -multiply_transposed(h, y), 0.5 * dot(y, y)};
      const auto& sp = inst.indices.at("sparse");
      Matrix sel(sp.size(), h.cols());
      for (std::size_t i = 0; i < sp.size(); ++i) sel(i, sp[i]) = 1.0;
      std::optional<ResidualPart> rp;
      const double lam = inst.weight("lambda");
      if (lam > 0.0) rp = ResidualPart{std::move(sel), Vector(sp.size()), lam, ResidualNorm::L1};
      const auto rows = static_cast<std::size_t>(inst.params.at("rows"));
      const auto cols = static_cast<std::size_t>(inst.params.at("cols"));
      ProxTerm nuc = ProxTerm::nuclear(rows, cols, inst.weight("tau")).restricted_to(inst.indices.at("low_rank"));
      return std::make_unique<CompositeObjective>(h.cols(), std::move(quad), std::move(rp), std::move(nuc));
    }
    case Family::L1Mpc: {
      QuadraticPart quad{inst.matrix("P"), inst.vector("q"), inst.params.at("r")};
      std::optional<ResidualPart> rp;
      const double lam = inst.weight("lambda");
      if (lam > 0.0) rp = ResidualPart{inst.matrix("D"), inst.vector("d0"), lam, ResidualNorm::L1};
      return std::make_unique<CompositeObjective>(inst.dim(), std::move(quad), std::move(rp),
                                                  ProxTerm::box(inst.vector("lo"), inst.vector("hi")));
    }
  }
  invalid("unknown family");
}

Vector initial_point(const ProblemInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  Vector x = gaussian_vector(rng, inst.dim());
  if (inst.family == Family::L1Mpc) x = project_box(x, inst.vector("lo"), inst.vector("hi"));
  return x;
}

// ---------------------------------------------------------------- JSON

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

json array_of(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

std::vector<double> read_array(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(read_number(e));
  return out;
}

constexpr const char* kFormat = "nsopt-instance/1";

}  // namespace

std::string to_json(const ProblemInstance& inst) {
  json j;
  j["format"] = kFormat;
  j["name"] = inst.name;
  j["family"] = std::string(to_string(inst.family));
  j["seed"] = inst.seed;
  j["params"] = json::object();
  for (const auto& [k, v] : inst.params) j["params"][k] = number(v);
  j["labels"] = inst.labels;
  j["weights"] = json::object();
  for (const auto& [k, v] : inst.weights) j["weights"][k] = number(v);
  j["curvature"] = inst.curvature;
  j["lipschitz_sq"] = inst.lipschitz_sq;
  j["matrices"] = json::object();
  for (const auto& [k, m] : inst.matrices) {
    j["matrices"][k] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", array_of(m.values())}};
  }
  j["vectors"] = json::object();
  for (const auto& [k, v] : inst.vectors) j["vectors"][k] = array_of(v.values());
  j["indices"] = inst.indices;
  return j.dump(1) + "\n";
}

ProblemInstance instance_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("instance JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != kFormat) throw Error(ErrorCode::ParseError, "not an nsopt instance file");
    ProblemInstance inst;
    inst.name = j.at("name").get<std::string>();
    inst.family = family_from_string(j.at("family").get<std::string>());
    inst.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("params").items()) inst.params[k] = read_number(v);
    inst.labels = j.at("labels").get<std::map<std::string, std::string>>();
    for (const auto& [k, v] : j.at("weights").items()) inst.weights[k] = read_number(v);
    inst.curvature = j.at("curvature").get<double>();
    inst.lipschitz_sq = j.at("lipschitz_sq").get<double>();
    for (const auto& [k, m] : j.at("matrices").items()) {
      inst.matrices.emplace(k, Matrix(m.at("rows").get<std::size_t>(), m.at("cols").get<std::size_t>(),
                                      read_array(m.at("data"))));
    }
    for (const auto& [k, v] : j.at("vectors").items()) inst.vectors.emplace(k, Vector(read_array(v)));
    inst.indices = j.at("indices").get<std::map<std::string, std::vector<std::size_t>>>();
    return inst;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("instance JSON: ") + e.what());
  }
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  const std::string text = to_json(inst);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return instance_from_json(ss.str());
}

// ---------------------------------------------------------------- LIBSVM

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view tok, double& out) {
  if (tok.empty()) return false;
  // from_chars rejects a leading '+', which LIBSVM writers sometimes emit
  if (tok.front() == '+') tok.remove_prefix(1);
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view tok, std::size_t& out) {
  if (tok.empty()) return false;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

LibsvmData parse_libsvm(std::istream& in, bool lenient) {
  std::vector<double> targets;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < view.size()) {
      const auto start = view.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      const auto stop = view.find_first_of(" \t", start);
      tokens.push_back(view.substr(start, stop == std::string_view::npos ? std::string_view::npos : stop - start));
      pos = stop == std::string_view::npos ? view.size() : stop;
    }

    double target = 0.0;
    if (!parse_double(tokens[0], target)) {
      throw ParseError(line_no, "malformed target '" + std::string(tokens[0]) + "'");
    }
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "feature '" + std::string(tok) + "' is not idx:val");
      }
      std::size_t idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx == 0) {
        throw ParseError(line_no, "bad feature index in '" + std::string(tok) + "'");
      }
      if (!parse_double(tok.substr(colon + 1), val)) {
        throw ParseError(line_no, "bad feature value in '" + std::string(tok) + "'");
      }
      if (!lenient && !entries.empty() && idx <= entries.back().first) {
        throw ParseError(line_no, "indices not strictly increasing at '" + std::string(tok) + "'");
      }
      entries.emplace_back(idx, val);
    }
    if (lenient) {
      std::sort(entries.begin(), entries.end());
      for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].first == entries[i - 1].first) {
          throw ParseError(line_no, "duplicate feature index " + std::to_string(entries[i].first));
        }
      }
    }
    if (!entries.empty()) max_index = std::max(max_index, entries.back().first);
    targets.push_back(target);
    rows.push_back(std::move(entries));
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read error in LIBSVM stream");
  if (rows.empty()) throw ParseError(line_no == 0 ? 1 : line_no, "no data rows");

  LibsvmData out{Matrix(rows.size(), max_index), Vector(std::move(targets))};
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [idx, val] : rows[r]) out.features(r, idx - 1) = val;
  return out;
}

LibsvmData load_libsvm(const std::string& path, bool lenient) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_libsvm(in, lenient);
}

ProblemInstance lasso_from_libsvm(const LibsvmData& data, const std::string& name, ResidualNorm norm, double eta) {
  if (data.features.cols() == 0) invalid("dataset has no features");
  ProblemInstance inst;
  inst.family = norm == ResidualNorm::L1 ? Family::LassoL1 : Family::LassoL2;
  inst.name = name;
  inst.params = {{"n", static_cast<double>(data.features.cols())}, {"m", static_cast<double>(data.features.rows())}};
  inst.labels = {{"source", name}};
  inst.weights = {{"eta", eta}};
  inst.curvature = spectral_norm_sq(data.features);
  inst.lipschitz_sq = norm == ResidualNorm::L1 ? static_cast<double>(data.features.rows()) : 1.0;
  inst.matrices.emplace("B", data.features);
  inst.vectors.emplace("b", data.targets);
  return inst;
}

}  // namespace nsopt
