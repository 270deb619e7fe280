#include "nsopt/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "nsopt/error.hpp"

namespace nsopt {

namespace {

using json = nlohmann::json;

struct AlgInfo {
  Algorithm alg;
  const char* id;
  const char* name;
};

constexpr AlgInfo kAlgorithms[] = {
    {Algorithm::Alg1, "alg1", "Alg1 (adaptive smoothing)"},
    {Algorithm::Nesterov, "nes", "Nesterov smoothing"},
    {Algorithm::TranDinh, "td", "TD stand-in (harmonic mu)"},
    {Algorithm::Subgradient, "sgd", "subgradient"},
    {Algorithm::ChambollePock, "cp", "Chambolle-Pock"},
    {Algorithm::Admm, "admm", "ADMM"},
};

const AlgInfo& info(Algorithm a) {
  for (const auto& i : kAlgorithms) {
    if (i.alg == a) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

std::string fmt(double v) { return format_double(v); }

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string_view to_string(Algorithm a) { return info(a).id; }
std::string_view display_name(Algorithm a) { return info(a).name; }

Algorithm algorithm_from_string(std::string_view id) {
  for (const auto& i : kAlgorithms) {
    if (id == i.id) return i.alg;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(id) + "' (alg1|nes|td|sgd|cp|admm)");
}

std::vector<Algorithm> all_algorithms() {
  std::vector<Algorithm> out;
  for (const auto& i : kAlgorithms) out.push_back(i.alg);
  return out;
}

void RunConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  ScheduleParams p = schedule;
  if (mu0_auto) p.mu0 = 1.0;
  p.validate();
  if (iters < 1) bad("iteration budget must be >= 1");
  if (checkpoints < 2) bad("checkpoint count must be >= 2");
  if (!(eps > 0.0) || !std::isfinite(eps)) bad("eps must be > 0");
  if (!(target > 0.0) || !std::isfinite(target)) bad("reference target must be > 0");
  if (rho && !(*rho > 0.0 && std::isfinite(*rho))) bad("rho must be > 0");
  if (td_mu0 && !(*td_mu0 > 0.0 && std::isfinite(*td_mu0))) bad("TD mu0 must be > 0");
  if (!(sgd_scale > 0.0) || !std::isfinite(sgd_scale)) bad("subgradient scale must be > 0");
}

// ---------------------------------------------------------------- reference cache

std::string instance_digest(const ProblemInstance& inst) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_json(inst)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string reference_cache_path(const std::string& problem_path) {
  const auto dot = problem_path.rfind('.');
  const auto slash = problem_path.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? problem_path.substr(0, dot) : problem_path) + ".ref.json";
}

ReferenceInfo compute_reference(const ProblemInstance& inst, const Objective& obj, double target,
                                std::size_t polish_iters) {
  ReferenceOptions ro;
  ro.polish_iters = polish_iters;
  ro.allow_uncertified = true;
  const Reference r = run_reference(obj, target, initial_point(inst, inst.seed), ro);
  return ReferenceInfo{r.x, r.value, r.grad_map_norm, r.mu, target, r.certified, "computed"};
}

std::optional<ReferenceInfo> load_reference(const std::string& path, const std::string& digest, double target) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "reference cache " + path + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format") != "nsopt-reference/1" || j.at("instance_digest") != digest) return std::nullopt;
    ReferenceInfo r;
    r.target = j.at("target").get<double>();
    r.certified = j.at("certified").get<bool>();
    if (r.target > target || !r.certified) return std::nullopt;
    r.value = parse_double_strict(j.at("value").get<std::string>());
    r.grad_map_norm = parse_double_strict(j.at("grad_map_norm").get<std::string>());
    r.mu = parse_double_strict(j.at("mu").get<std::string>());
    std::vector<double> xs;
    for (const auto& v : j.at("x")) xs.push_back(parse_double_strict(v.get<std::string>()));
    r.x = Vector(std::move(xs));
    r.source = "cache";
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "reference cache " + path + " is malformed: " + e.what());
  }
}

void save_reference(const std::string& path, const ReferenceInfo& ref, const std::string& digest) {
  json j;
  j["format"] = "nsopt-reference/1";
  j["instance_digest"] = digest;
  // values as 17-digit strings so the cache round-trips exactly
  j["value"] = fmt(ref.value);
  j["grad_map_norm"] = fmt(ref.grad_map_norm);
  j["mu"] = fmt(ref.mu);
  j["target"] = ref.target;
  j["certified"] = ref.certified;
  json xs = json::array();
  for (double v : ref.x) xs.push_back(fmt(v));
  j["x"] = std::move(xs);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write reference cache " + path);
  out << j.dump(1) << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

ReferenceInfo cached_reference(const ProblemInstance& inst, const Objective& obj, double target,
                               const std::string& cache_path, std::vector<std::string>& warnings,
                               std::size_t polish_iters) {
  const std::string digest = instance_digest(inst);
  if (auto hit = load_reference(cache_path, digest, target)) return *hit;
  ReferenceInfo r = compute_reference(inst, obj, target, polish_iters);
  if (!r.certified) {
    warnings.push_back("reference not certified: gradient-mapping norm " + fmt(r.grad_map_norm) + " above target " +
                       fmt(target) + "; gaps are measured against the best value found");
  }
  save_reference(cache_path, r, digest);
  return r;
}

// ---------------------------------------------------------------- single run

RunResult run_configured(const ProblemInstance& inst, const Objective& obj, const RunConfig& cfg,
                         const std::optional<ReferenceInfo>& ref, std::vector<std::string>& warnings) {
  cfg.validate();
  RunResult res;
  Metadata& m = res.meta;
  m.emplace_back("tool", "nsopt");
  m.emplace_back("instance", inst.name);
  m.emplace_back("family", std::string(to_string(inst.family)));
  m.emplace_back("instance_seed", std::to_string(inst.seed));
  m.emplace_back("instance_digest", instance_digest(inst));
  m.emplace_back("dim", std::to_string(obj.dim()));
  m.emplace_back("algorithm", std::string(to_string(cfg.algorithm)));
  m.emplace_back("algorithm_name", std::string(display_name(cfg.algorithm)));
  m.emplace_back("iters", std::to_string(cfg.iters));
  m.emplace_back("seed", std::to_string(cfg.seed));
  m.emplace_back("x0", "initial_point(instance, seed)");

  const Vector x0 = initial_point(inst, cfg.seed);
  RunOptions ro;
  ro.iters = cfg.iters;
  if (ref) {
    ro.f_ref = ref->value;
    m.emplace_back("reference_value", fmt(ref->value));
    m.emplace_back("reference_grad_map_norm", fmt(ref->grad_map_norm));
    m.emplace_back("reference_mu", fmt(ref->mu));
    m.emplace_back("reference_target", fmt(ref->target));
    m.emplace_back("reference_certified", ref->certified ? "true" : "false");
    m.emplace_back("gap", "|F - F*| / |F*|, denominator 1 when |F*| < 1e-12");
    res.initial_gap = relative_gap(obj.value(x0), ref->value);
  } else {
    m.emplace_back("reference_value", "none");
    res.initial_gap = std::numeric_limits<double>::quiet_NaN();
  }

  // mu0 resolution, shared by Alg1 and the TD stand-in
  double mu0 = cfg.schedule.mu0;
  std::string mu0_source = "given";
  if (cfg.mu0_auto) {
    if (ref && distance(x0, ref->x) > 0.0) {
      mu0 = auto_mu0(obj, x0, ref->x);
      mu0_source = "auto: ||map|| ||x0 - x_ref|| / sqrt(3 L_f^2)";
    } else {
      mu0 = 1.0;
      mu0_source = "auto fallback 1.0 (no reference)";
      warnings.push_back("mu0 auto needs a reference point; falling back to mu0 = 1");
    }
  }

  std::vector<TraceRecord>& trace = res.trace;
  trace.reserve(cfg.iters);
  ro.sink = [&trace](const TraceRecord& r) { trace.push_back(r); };
  const auto t0 = std::chrono::steady_clock::now();
  switch (cfg.algorithm) {
    case Algorithm::Alg1: {
      ScheduleParams p = cfg.schedule;
      p.mu0 = mu0;
      const ScheduleState s1 = advance(ScheduleState::initial(p), p);
      m.emplace_back("a", fmt(p.a));
      m.emplace_back("b", fmt(p.b));
      m.emplace_back("c", fmt(p.c));
      m.emplace_back("beta0", fmt(p.beta0));
      m.emplace_back("mu0", fmt(p.mu0));
      m.emplace_back("mu0_source", mu0_source);
      m.emplace_back("mu1", fmt(s1.mu));
      m.emplace_back("first_step_mu", "mu1");
      run_alg1(obj, p, x0, ro);
      break;
    }
    case Algorithm::Nesterov:
      m.emplace_back("eps", fmt(cfg.eps));
      m.emplace_back("mu", fmt(2.0 * cfg.eps / obj.lipschitz_sq()));
      run_nesterov_smoothing(obj, cfg.eps, x0, ro);
      break;
    case Algorithm::TranDinh: {
      const double td = cfg.td_mu0.value_or(mu0);
      m.emplace_back("mu0", fmt(td));
      m.emplace_back("mu0_source", cfg.td_mu0 ? "given" : mu0_source);
      m.emplace_back("mu_rule", "mu_k = mu0 / (k + 1), stand-in for the adaptive-smoothing baseline");
      run_tran_dinh(obj, td, x0, ro);
      break;
    }
    case Algorithm::Subgradient:
      m.emplace_back("step_rule", cfg.sgd_rule == StepRule::InvSqrt ? "scale/sqrt(k+1)" : "scale/(k+1)");
      m.emplace_back("step_scale", fmt(cfg.sgd_scale));
      m.emplace_back("reported_iterate", "best so far");
      run_subgradient(obj, x0, ro, cfg.sgd_rule, cfg.sgd_scale);
      break;
    case Algorithm::ChambollePock:
      run_chambolle_pock(obj, x0, ro);
      break;
    case Algorithm::Admm:
      if (cfg.rho) {
        m.emplace_back("rho", fmt(*cfg.rho));
        run_admm(obj, *cfg.rho, x0, ro);
      } else {
        RunOptions quiet = ro;
        quiet.sink = nullptr;
        const AdmmSweep sweep = run_admm_sweep(obj, x0, quiet);
        trace = sweep.trace;
        std::ostringstream os;
        os << "rho sweep";
        for (const auto& [rho, v] : sweep.final_gaps) os << " " << fmt(rho) << ":" << fmt(v);
        m.emplace_back("rho", fmt(sweep.best_rho));
        m.emplace_back("rho_sweep", os.str());
        res.note = "best rho " + fmt(sweep.best_rho);
      }
      break;
  }
  res.wall_ms = ms_since(t0);
  return res;
}

// ---------------------------------------------------------------- bench

ProblemInstance bench_instance(std::string_view suite, std::uint64_t seed, std::size_t size) {
  if (suite == "lasso-l1" || suite == "lasso-l2") {
    LassoOptions o;
    o.n = size ? size : 100;
    o.m = o.n;
    o.seed = seed;
    o.norm = suite == "lasso-l1" ? ResidualNorm::L1 : ResidualNorm::L2;
    return gen_lasso(o);
  }
  if (suite == "maxcut") return gen_maxcut(size ? size : 50, seed, MaxCutReg::L1, 1.0);
  if (suite == "fault-diag") {
    FaultDiagOptions o;
    o.seed = seed;
    if (size) {
      o.lag = size;
      o.length = 4 * size;
    }
    return gen_fault_diag(o);
  }
  if (suite == "mpc") {
    MpcOptions o;
    if (size) o.horizon = size;
    return gen_mpc(o);
  }
  if (suite.substr(0, 7) == "libsvm:") {
    const std::string path(suite.substr(7));
    if (path.empty()) throw Error(ErrorCode::InvalidArgument, "libsvm suite needs a path: libsvm:<file>");
    const auto slash = path.find_last_of('/');
    return lasso_from_libsvm(load_libsvm(path), slash == std::string::npos ? path : path.substr(slash + 1),
                             ResidualNorm::L1, 1.0);
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown suite '" + std::string(suite) + "' (lasso-l1|lasso-l2|maxcut|fault-diag|mpc|libsvm:<path>)");
}

std::size_t bench_threads() {
  if (const char* env = std::getenv("NSOPT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<BenchRun> run_bench(const ProblemInstance& inst, const Objective& obj, const ReferenceInfo& ref,
                                const BenchOptions& opts, std::vector<RunResult>& results) {
  const std::size_t n = opts.algorithms.size();
  std::vector<BenchRun> runs(n);
  results.assign(n, RunResult{});
  std::vector<std::vector<std::string>> warnings(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      RunConfig cfg = opts.base;
      cfg.algorithm = opts.algorithms[i];
      BenchRun& run = runs[i];
      run.algorithm = std::string(to_string(cfg.algorithm));
      run.label = std::string(display_name(cfg.algorithm));
      const auto t0 = std::chrono::steady_clock::now();
      try {
        results[i] = run_configured(inst, obj, cfg, ref, warnings[i]);
        run.ok = true;
        run.trace = results[i].trace;
        run.initial_gap = results[i].initial_gap;
        run.note = results[i].note;
      } catch (const Error& e) {
        run.ok = false;
        run.error = e.code() == ErrorCode::Unsupported ? "unsupported: " + e.detail() : e.what();
      } catch (const std::exception& e) {
        run.ok = false;
        run.error = e.what();
      }
      run.wall_ms = ms_since(t0);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(opts.threads, 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& w : warnings[i]) {
      if (!runs[i].note.empty()) runs[i].note += "; ";
      runs[i].note += w;
    }
  }
  return runs;
}

}  // namespace nsopt
