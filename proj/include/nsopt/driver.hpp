#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsopt/problems.hpp"
#include "nsopt/report.hpp"
#include "nsopt/solvers.hpp"

namespace nsopt {

enum class Algorithm { Alg1, Nesterov, TranDinh, Subgradient, ChambollePock, Admm };

std::string_view to_string(Algorithm a);  // CLI id: alg1, nes, td, sgd, cp, admm
Algorithm algorithm_from_string(std::string_view id);
std::string_view display_name(Algorithm a);
std::vector<Algorithm> all_algorithms();

struct RunConfig {
  Algorithm algorithm = Algorithm::Alg1;
  ScheduleParams schedule;  // schedule.mu0 is ignored while mu0_auto is set
  bool mu0_auto = true;
  std::size_t iters = 1000;
  std::uint64_t seed = 42;     // start point x0 = initial_point(instance, seed)
  double eps = 1e-3;           // Nesterov smoothing accuracy
  double target = 1e-6;        // reference certificate on the gradient-mapping norm
  std::optional<double> rho;   // ADMM penalty; empty runs the {0.1, 1, 10} sweep
  std::optional<double> td_mu0;  // empty reuses the resolved mu0
  StepRule sgd_rule = StepRule::InvSqrt;
  double sgd_scale = 0.1;
  std::size_t checkpoints = 10;

  void validate() const;
};

struct ReferenceInfo {
  Vector x;
  double value = 0.0;
  double grad_map_norm = 0.0;
  double mu = 0.0;
  double target = 0.0;
  bool certified = false;
  std::string source;  // "cache" or "computed"
};

// FNV-1a over the canonical instance JSON; ties a cached reference to its instance.
std::string instance_digest(const ProblemInstance& inst);
std::string reference_cache_path(const std::string& problem_path);

ReferenceInfo compute_reference(const ProblemInstance& inst, const Objective& obj, double target,
                                std::size_t polish_iters = 100000);
// Nullopt when the file is missing, belongs to another instance, or was certified at a looser target.
std::optional<ReferenceInfo> load_reference(const std::string& path, const std::string& digest, double target);
void save_reference(const std::string& path, const ReferenceInfo& ref, const std::string& digest);

// Loads the cache beside the instance or computes and stores it. Uncertified
// references are returned with a warning rather than rejected.
ReferenceInfo cached_reference(const ProblemInstance& inst, const Objective& obj, double target,
                               const std::string& cache_path, std::vector<std::string>& warnings,
                               std::size_t polish_iters = 100000);

struct RunResult {
  std::vector<TraceRecord> trace;
  Metadata meta;
  std::string note;
  double initial_gap = 0.0;
  double wall_ms = 0.0;
};

// Runs one configured solver. Library errors propagate unchanged.
RunResult run_configured(const ProblemInstance& inst, const Objective& obj, const RunConfig& cfg,
                         const std::optional<ReferenceInfo>& ref, std::vector<std::string>& warnings);

// Suites: lasso-l1, lasso-l2, maxcut, fault-diag, mpc, libsvm:<path>. `size` 0 keeps the suite default.
ProblemInstance bench_instance(std::string_view suite, std::uint64_t seed, std::size_t size = 0);

struct BenchOptions {
  std::vector<Algorithm> algorithms = all_algorithms();
  RunConfig base;
  std::size_t threads = 1;
};

// Runs every algorithm on the instance, at most `threads` at a time; failures are
// recorded per run.
std::vector<BenchRun> run_bench(const ProblemInstance& inst, const Objective& obj, const ReferenceInfo& ref,
                                const BenchOptions& opts, std::vector<RunResult>& results);

// NSOPT_THREADS when set and positive, otherwise the hardware concurrency.
std::size_t bench_threads();

}  // namespace nsopt
