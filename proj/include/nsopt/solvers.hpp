#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsopt/numerics.hpp"
#include "nsopt/objective.hpp"
#include "nsopt/schedule.hpp"

namespace nsopt {

struct TraceRecord {
  std::size_t iter = 0;
  double elapsed_ms = 0.0;
  double objective = 0.0;
  double gap = 0.0;
  double mu = 0.0;
  double beta = 0.0;
  double stepsize = 0.0;
  double grad_map_norm = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

// |F - F_ref| / |F_ref|, with the denominator replaced by 1 when |F_ref| < 1e-12.
double relative_gap(double f, double f_ref);

struct RunOptions {
  std::size_t iters = 1000;
  std::optional<double> f_ref;  // gap column is NaN without it
  TraceSink sink;
};

struct SolverState {
  Vector x;
  Vector y;      // reported iterate
  Vector dual;   // primal-dual methods only
  ScheduleState schedule;
  double stepsize = 0.0;
  std::size_t iterations = 0;
};

// One Algorithm-1 transition k -> k+1, seen after it completes.
struct Alg1Step {
  std::size_t k;
  const Vector& x;       // x_k
  const Vector& y;       // y_k
  const Vector& y_next;  // y_{k+1}
  const Vector& x_next;  // x_{k+1}
  const ScheduleState& before;  // (beta_k, mu_k)
  const ScheduleState& after;   // (beta_{k+1}, mu_{k+1})
  double stepsize;              // zeta_k
};

using Alg1Observer = std::function<void(const Alg1Step&)>;

// Adaptive accelerated smoothing: per iteration advance beta then mu, take a
// proximal-gradient step on F_{mu_{k+1}} with zeta_k = stepsize(mu_{k+1}) from
// x_k, and extrapolate with gamma_k = (1 - beta_k) / beta_{k+1}.
SolverState run_alg1(const Objective& obj, const ScheduleParams& params, const Vector& x0,
                     const RunOptions& opts, const Alg1Observer& observer = {});

// Accelerated proximal gradient on F_mu with the fixed mu = 2 eps / L_f^2.
SolverState run_nesterov_smoothing(const Objective& obj, double eps, const Vector& x0, const RunOptions& opts);

// Stand-in for the adaptive-smoothing baseline: harmonic mu_k = mu0 / (k + 1),
// decoupled from the momentum sequence.
SolverState run_tran_dinh(const Objective& obj, double mu0, const Vector& x0, const RunOptions& opts);

enum class StepRule { InvSqrt, Inv };

// x_{k+1} = x_k - t_k g_k (projected when h is an indicator), t_k = scale/sqrt(k+1)
// or scale/(k+1). The trace reports the best iterate so far.
SolverState run_subgradient(const Objective& obj, const Vector& x0, const RunOptions& opts,
                            StepRule rule, double scale);

// Primal-dual hybrid gradient on w||Kx - d||_p + h(x) with tau = sigma = 1/||K||.
SolverState run_chambolle_pock(const Objective& obj, const Vector& x0, const RunOptions& opts,
                               std::optional<Vector> y0 = std::nullopt);

// Linearized ADMM on min h(x) + w||z||_p s.t. Kx - z = d with penalty rho.
SolverState run_admm(const Objective& obj, double rho, const Vector& x0, const RunOptions& opts);

struct AdmmSweep {
  double best_rho = 0.0;
  SolverState state;
  std::vector<TraceRecord> trace;  // of the best run
  std::vector<std::pair<double, double>> final_gaps;  // (rho, gap or objective)
};

// Runs every penalty and keeps the one with the lowest final objective.
AdmmSweep run_admm_sweep(const Objective& obj, const Vector& x0, const RunOptions& opts,
                         const std::vector<double>& rhos = {0.1, 1.0, 10.0});

struct ReferenceOptions {
  std::size_t alg1_iters = 2000;
  std::size_t polish_iters = 100000;
  double mu_start = 1e-2;
  double mu_end = 1e-12;
  bool allow_uncertified = false;  // return the best point instead of throwing NotCertified
};

struct Reference {
  Vector x;
  double value = 0.0;
  double grad_map_norm = 0.0;  // certificate at the final smoothing level
  double mu = 0.0;
  bool certified = false;
};

// Long c = 0 run followed by a continuation polish; certified when the
// gradient-mapping norm at the final smoothing level is <= target.
Reference run_reference(const Objective& obj, double target, const Vector& x0,
                        const ReferenceOptions& options = {});

// ||map|| * ||x0 - x_ref|| / sqrt(3 L_f^2)
double auto_mu0(const Objective& obj, const Vector& x0, const Vector& x_ref);

// Iterate history of an Algorithm-1 run: entry k holds (x_k, y_k, beta_k, mu_k).
struct Alg1History {
  std::vector<Vector> x;
  std::vector<Vector> y;
  std::vector<ScheduleState> schedule;

  Alg1Observer recorder();
};

struct Bound7Report {
  double e_printed = 0.0;   // constant as stated alongside the bound
  double e_telescoped = 0.0;  // constant obtained by summing the Lyapunov inequality
  bool bound_ok = true;
  std::size_t first_bound_violation = 0;
  double worst_bound_ratio = 0.0;  // max (F(y_{T+1}) - F*) / rhs
  bool lyapunov_ok = true;
  std::size_t first_lyapunov_violation = 0;
  std::size_t lyapunov_violations = 0;
  bool increment_ok = true;  // per-step inequality before the monotonicity substitution
  std::size_t first_increment_violation = 0;
  std::size_t increment_violations = 0;
  std::size_t negative_delta = 0;  // iterations with F_mu(y_k) < F*

  void require() const;
};

// Checks F(y_{T+1}) - F* <= L_f^2 mu_{T+1}/2 + E/(2 beta_T^2 mu_{T+1}) at every T
// (1e-8 relative slack) and the per-iteration Lyapunov inequality. The curvature
// scale is folded into E so the bound reads in mu for any stepsize rule mu/L_A.
Bound7Report audit_bound7(const Alg1History& history, const Objective& obj, const Vector& x_star,
                          double f_star, const ScheduleParams& params);

// First T (1-based row index) with F(y_T) - F* <= eps, or nullopt.
std::optional<std::size_t> first_reaching(const Alg1History& history, const Objective& obj, double f_star,
                                          double eps);

}  // namespace nsopt
