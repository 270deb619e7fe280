// nsopt: generate instances, run solvers, benchmark and audit.
//
// Exit codes: 0 ok, 1 audit or bench failure, 2 invalid input or unsupported
// combination, 3 I/O failure, 4 divergence guard.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nsopt/audit.hpp"
#include "nsopt/driver.hpp"
#include "nsopt/error.hpp"

namespace fs = std::filesystem;
using namespace nsopt;

namespace {

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::Io: return 3;
    case ErrorCode::NonFiniteIterate:
    case ErrorCode::DegenerateDenominator: return 4;
    case ErrorCode::AuditFailure:
    case ErrorCode::NotCertified: return 1;
    default: return 2;
  }
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

ResidualNorm parse_norm(const std::string& s) {
  if (s == "l1") return ResidualNorm::L1;
  if (s == "l2") return ResidualNorm::L2;
  throw Error(ErrorCode::InvalidArgument, "norm must be l1 or l2");
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string out;
  std::uint64_t seed = 42;
  LassoOptions lasso;
  std::string norm = "l1";
  std::size_t maxcut_n = 50;
  std::string reg = "l1";
  double eta = 1.0;
  FaultDiagOptions fault;
  MpcOptions mpc;
  std::string system;
  std::vector<double> x0, x_ref, u_min, u_max, u_prev;
  std::string data;
  bool lenient = false;
};

Matrix matrix_from_json(const nlohmann::json& j, const std::string& key) {
  std::vector<double> flat;
  std::size_t cols = 0;
  const auto& rows = j.at(key);
  for (const auto& row : rows) {
    if (cols == 0) cols = row.size();
    if (row.size() != cols || cols == 0) throw Error(ErrorCode::DimensionMismatch, "ragged matrix '" + key + "'");
    for (const auto& v : row) flat.push_back(v.get<double>());
  }
  return Matrix(rows.size(), cols, std::move(flat));
}

void load_system(const std::string& path, MpcOptions& o) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    o.a = matrix_from_json(j, "A");
    o.b = matrix_from_json(j, "B");
    if (j.contains("Q")) o.q = matrix_from_json(j, "Q");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "system file '" + path + "': " + e.what());
  }
}

void print_summary(const ProblemInstance& inst, const std::string& out) {
  std::cout << "wrote " << out << "\n"
            << "  name       " << inst.name << "\n"
            << "  family     " << to_string(inst.family) << "\n"
            << "  dim        " << inst.dim() << "\n"
            << "  L_A        " << format_double(inst.curvature) << "\n"
            << "  L_f^2      " << format_double(inst.lipschitz_sq) << "\n";
  for (const auto& [k, m] : inst.matrices) std::cout << "  " << k << "  " << m.rows() << " x " << m.cols() << "\n";
}

int finish_gen(const ProblemInstance& inst, const std::string& out) {
  validate(inst);
  save_instance(inst, out);
  print_summary(inst, out);
  return 0;
}

void add_gen(CLI::App& app, GenArgs& g, std::function<int()>& action) {
  auto* gen = app.add_subcommand("gen", "generate a problem instance as JSON");
  gen->require_subcommand(1);
  auto common = [&g](CLI::App* c) {
    c->add_option("--out", g.out, "output JSON path")->required();
    c->add_option("--seed", g.seed, "generator seed");
  };

  auto* lasso = gen->add_subcommand("lasso", "min ||Bx - b||_p + eta ||x||_1");
  common(lasso);
  lasso->add_option("--n", g.lasso.n, "unknowns");
  lasso->add_option("--m", g.lasso.m, "measurements");
  lasso->add_flag("--correlated", g.lasso.correlated, "correlate neighbouring columns");
  lasso->add_option("--norm", g.norm, "residual norm: l1 or l2");
  lasso->add_option("--eta", g.lasso.eta, "l1 weight");
  lasso->add_option("--noise-std", g.lasso.noise_std, "measurement noise");
  lasso->callback([&] {
    action = [&] {
      g.lasso.seed = g.seed;
      g.lasso.norm = parse_norm(g.norm);
      return finish_gen(gen_lasso(g.lasso), g.out);
    };
  });

  auto* maxcut = gen->add_subcommand("maxcut", "MaxCut SDP dual");
  common(maxcut);
  maxcut->add_option("--n", g.maxcut_n, "graph size");
  maxcut->add_option("--reg", g.reg, "regularizer: l1 or l2sq");
  maxcut->add_option("--eta", g.eta, "regularizer weight");
  maxcut->callback([&] {
    action = [&] {
      if (g.reg != "l1" && g.reg != "l2sq") throw Error(ErrorCode::InvalidArgument, "reg must be l1 or l2sq");
      return finish_gen(gen_maxcut(g.maxcut_n, g.seed, g.reg == "l1" ? MaxCutReg::L1 : MaxCutReg::SquaredL2, g.eta),
                        g.out);
    };
  });

  auto* fault = gen->add_subcommand("fault-diag", "low-rank plus sparse fault estimation");
  common(fault);
  fault->add_option("--length", g.fault.length, "signal length T");
  fault->add_option("--lag", g.fault.lag, "low-rank block length L");
  fault->add_option("--rows", g.fault.rows, "low-rank reshape rows (0 picks a divisor of L)");
  fault->add_option("--sparse-len", g.fault.sparse_len, "sparse block length (0 means L)");
  fault->add_option("--faults", g.fault.faults, "number of injected faults");
  fault->add_option("--tau", g.fault.tau, "nuclear-norm weight");
  fault->add_option("--lambda", g.fault.lambda, "l1 weight");
  fault->add_option("--noise-std", g.fault.noise_std, "output noise");
  fault->callback([&] {
    action = [&] {
      g.fault.seed = g.seed;
      return finish_gen(gen_fault_diag(g.fault), g.out);
    };
  });

  auto* mpc = gen->add_subcommand("mpc", "condensed l1-regularized MPC");
  common(mpc);
  mpc->add_option("--horizon", g.mpc.horizon, "horizon H");
  mpc->add_option("--lambda", g.mpc.lambda, "input-rate l1 weight");
  mpc->add_option("--dt", g.mpc.dt, "sample time of the default double integrator");
  mpc->add_option("--system", g.system, "JSON file with A, B and optional Q");
  mpc->add_option("--x0", g.x0, "initial state")->delimiter(',');
  mpc->add_option("--x-ref", g.x_ref, "reference state")->delimiter(',');
  mpc->add_option("--u-min", g.u_min, "lower input bounds")->delimiter(',');
  mpc->add_option("--u-max", g.u_max, "upper input bounds")->delimiter(',');
  mpc->add_option("--u-prev", g.u_prev, "input applied before the horizon")->delimiter(',');
  mpc->callback([&] {
    action = [&] {
      if (!g.system.empty()) load_system(g.system, g.mpc);
      g.mpc.x0 = Vector(g.x0);
      g.mpc.x_ref = Vector(g.x_ref);
      g.mpc.u_min = Vector(g.u_min);
      g.mpc.u_max = Vector(g.u_max);
      g.mpc.u_prev = Vector(g.u_prev);
      ProblemInstance inst = gen_mpc(g.mpc);
      inst.seed = g.seed;
      return finish_gen(inst, g.out);
    };
  });

  auto* libsvm = gen->add_subcommand("libsvm", "LASSO on a LIBSVM regression file");
  common(libsvm);
  libsvm->add_option("--data", g.data, "LIBSVM file")->required();
  libsvm->add_option("--norm", g.norm, "residual norm: l1 or l2");
  libsvm->add_option("--eta", g.eta, "l1 weight");
  libsvm->add_flag("--lenient", g.lenient, "accept unordered feature indices");
  libsvm->callback([&] {
    action = [&] {
      const auto name = fs::path(g.data).filename().string();
      ProblemInstance inst = lasso_from_libsvm(load_libsvm(g.data, g.lenient), name, parse_norm(g.norm), g.eta);
      inst.seed = g.seed;
      return finish_gen(inst, g.out);
    };
  });
}

// ---------------------------------------------------------------- shared run flags

struct RunArgs {
  RunConfig cfg;
  std::string alg = "alg1";
  std::string mu0 = "auto";
  std::string sgd_rule = "invsqrt";
  double rho = 0.0;
  double td_mu0 = 0.0;
  std::size_t ref_iters = 100000;
};

void add_run_flags(CLI::App* c, RunArgs& r) {
  c->add_option("--iters", r.cfg.iters, "iteration budget");
  c->add_option("--a", r.cfg.schedule.a, "schedule a > 1");
  c->add_option("--b", r.cfg.schedule.b, "schedule b > 0");
  c->add_option("--c", r.cfg.schedule.c, "smoothing floor c >= 0");
  c->add_option("--mu0", r.mu0, "initial smoothing: a number or 'auto'");
  c->add_option("--beta0", r.cfg.schedule.beta0, "initial momentum");
  c->add_option("--eps", r.cfg.eps, "Nesterov smoothing accuracy");
  c->add_option("--seed", r.cfg.seed, "start-point seed");
  c->add_option("--target", r.cfg.target, "reference gradient-mapping target");
  c->add_option("--rho", r.rho, "ADMM penalty (default: sweep 0.1, 1, 10)");
  c->add_option("--td-mu0", r.td_mu0, "TD stand-in mu0 (default: the resolved mu0)");
  c->add_option("--sgd-rule", r.sgd_rule, "subgradient steps: invsqrt or inv");
  c->add_option("--sgd-scale", r.cfg.sgd_scale, "subgradient step scale");
  c->add_option("--checkpoints", r.cfg.checkpoints, "report checkpoints");
  c->add_option("--ref-iters", r.ref_iters, "polish budget when computing the reference optimum");
}

void resolve(RunArgs& r) {
  r.cfg.algorithm = algorithm_from_string(r.alg);
  if (r.mu0 == "auto") {
    r.cfg.mu0_auto = true;
  } else {
    r.cfg.mu0_auto = false;
    try {
      r.cfg.schedule.mu0 = parse_double_strict(r.mu0);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidArgument, "--mu0 must be a number or 'auto'");
    }
  }
  if (r.sgd_rule == "invsqrt") {
    r.cfg.sgd_rule = StepRule::InvSqrt;
  } else if (r.sgd_rule == "inv") {
    r.cfg.sgd_rule = StepRule::Inv;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--sgd-rule must be invsqrt or inv");
  }
  if (r.rho != 0.0) r.cfg.rho = r.rho;
  if (r.td_mu0 != 0.0) r.cfg.td_mu0 = r.td_mu0;
  r.cfg.validate();
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  RunArgs run;
  std::string problem;
  std::string trace;
  bool no_reference = false;
};

int cmd_solve(SolveArgs& s) {
  resolve(s.run);
  const ProblemInstance inst = load_instance(s.problem);
  validate(inst);
  const auto obj = make_objective(inst);
  const Algorithm alg = s.run.cfg.algorithm;
  if ((alg == Algorithm::ChambollePock || alg == Algorithm::Admm) && !obj->linear_split()) {
    throw Error(ErrorCode::Unsupported, obj->split_obstacle());
  }
  std::vector<std::string> warnings;
  std::optional<ReferenceInfo> ref;
  if (!s.no_reference) {
    ref = cached_reference(inst, *obj, s.run.cfg.target, reference_cache_path(s.problem), warnings, s.run.ref_iters);
  }
  RunResult res = run_configured(inst, *obj, s.run.cfg, ref, warnings);
  warn(warnings);
  res.meta.insert(res.meta.begin() + 1, {"problem", s.problem});
  for (const auto& w : warnings) res.meta.emplace_back("warning", w);
  if (s.trace.empty()) {
    write_trace_csv(std::cout, res.meta, res.trace);
  } else {
    write_trace_csv(s.trace, res.meta, res.trace);
    const TraceRecord& last = res.trace.back();
    std::cout << display_name(s.run.cfg.algorithm) << ": " << res.trace.size() << " iterations, F = "
              << format_double(last.objective) << ", gap = " << format_double(last.gap) << ", "
              << format_double(res.wall_ms) << " ms -> " << s.trace << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  RunArgs run;
  std::string suite;
  std::string algs;
  std::string out;
  std::uint64_t instance_seed = 42;
  std::size_t size = 0;
};

std::vector<Algorithm> parse_algs(const std::string& list) {
  if (list.empty()) return all_algorithms();
  std::vector<Algorithm> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(algorithm_from_string(item));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--algs is empty");
  return out;
}

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  body(out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

int cmd_bench(BenchArgs& b) {
  resolve(b.run);
  BenchOptions opts;
  opts.algorithms = parse_algs(b.algs);
  opts.base = b.run.cfg;
  opts.threads = bench_threads();
  const ProblemInstance inst = bench_instance(b.suite, b.instance_seed, b.size);
  validate(inst);
  const auto obj = make_objective(inst);

  std::error_code ec;
  fs::create_directories(b.out, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + b.out + ": " + ec.message());
  const fs::path dir(b.out);
  save_instance(inst, (dir / "instance.json").string());
  std::vector<std::string> warnings;
  const ReferenceInfo ref =
      cached_reference(inst, *obj, b.run.cfg.target, (dir / "instance.ref.json").string(), warnings,
                       b.run.ref_iters);
  warn(warnings);

  std::vector<RunResult> results;
  std::vector<BenchRun> runs = run_bench(inst, *obj, ref, opts, results);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].ok) {
      std::cerr << runs[i].algorithm << ": " << runs[i].error << "\n";
      continue;
    }
    ++ok;
    Metadata meta = results[i].meta;
    meta.insert(meta.begin() + 1, {"suite", b.suite});
    write_trace_csv((dir / (runs[i].algorithm + ".csv")).string(), meta, runs[i].trace);
  }

  Metadata meta = {{"tool", "nsopt"},
                   {"instance", inst.name},
                   {"instance_seed", std::to_string(inst.seed)},
                   {"instance_digest", instance_digest(inst)},
                   {"iters", std::to_string(b.run.cfg.iters)},
                   {"seed", std::to_string(b.run.cfg.seed)},
                   {"threads", std::to_string(opts.threads)},
                   {"reference_value", format_double(ref.value)},
                   {"reference_certified", ref.certified ? "true" : "false"}};
  for (const auto& w : warnings) meta.emplace_back("warning", w);
  const BenchReport report = make_report(b.suite, meta, std::move(runs), b.run.cfg.iters, b.run.cfg.checkpoints);
  write_text(dir / "report.csv", [&](std::ostream& o) { report.write_csv(o); });
  write_text(dir / "report.txt", [&](std::ostream& o) { report.write_table(o); });
  write_text(dir / "plot.svg", [&](std::ostream& o) { report.write_svg(o); });
  report.write_table(std::cout);
  return ok > 0 ? 0 : 1;
}

// ---------------------------------------------------------------- audit

int cmd_audit(const std::string& suite, std::uint64_t seed) {
  const auto lines = run_audit(suite, seed);
  bool all = true;
  for (const auto& l : lines) {
    all = all && l.pass;
    std::cout << (l.pass ? "PASS " : "FAIL ") << l.suite << ": " << l.name;
    if (!l.detail.empty()) std::cout << " (" << l.detail << ")";
    std::cout << "\n";
  }
  std::cout << (all ? "all checks passed" : "some checks failed") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nsopt: adaptive smoothing for nonsmooth composite problems"};
  app.require_subcommand(1);
  std::function<int()> action;

  GenArgs gen;
  add_gen(app, gen, action);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "run one solver on an instance and write its trace");
  s->add_option("--problem", solve.problem, "instance JSON")->required();
  s->add_option("--alg", solve.run.alg, "alg1|nes|td|sgd|cp|admm");
  s->add_option("--trace", solve.trace, "CSV trace path (default: stdout)");
  s->add_flag("--no-reference", solve.no_reference, "skip F*; the gap column becomes nan");
  add_run_flags(s, solve.run);
  s->callback([&] { action = [&] { return cmd_solve(solve); }; });

  BenchArgs bench;
  bench.run.cfg.iters = 10000;
  auto* b = app.add_subcommand("bench", "run several solvers on a suite instance and report");
  b->add_option("--suite", bench.suite, "lasso-l1|lasso-l2|maxcut|fault-diag|mpc|libsvm:<path>")->required();
  b->add_option("--algs", bench.algs, "comma-separated algorithms (default: all)");
  b->add_option("--out", bench.out, "output directory")->required();
  b->add_option("--instance-seed", bench.instance_seed, "instance generator seed");
  b->add_option("--size", bench.size, "suite size parameter (0 keeps the default)");
  add_run_flags(b, bench.run);
  b->callback([&] { action = [&] { return cmd_bench(bench); }; });

  std::string audit_suite = "all";
  std::uint64_t audit_seed = 42;
  auto* a = app.add_subcommand("audit", "run the invariant suites");
  a->add_option("--suite", audit_suite, "schedule|smoothing|prox|bound7|tail-rate|all");
  a->add_option("--seed", audit_seed, "seed");
  a->callback([&] { action = [&] { return cmd_audit(audit_suite, audit_seed); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Unsupported) {
      std::cerr << "unsupported: " << e.detail() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
