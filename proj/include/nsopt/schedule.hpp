#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nsopt {

struct ScheduleParams {
  double a = 2.0;
  double b = 1.0;
  double c = 0.0;  // floor on mu
  double mu0 = 1.0;
  double beta0 = 1.0;

  void validate() const;
  // b(a-1) / (b(a-1) + 1): asymptotic ratio mu_{k+1}/mu_k when c = 0
  double limit_ratio() const;
  // ceil(2 / log(1 + 1/(b(a-1)))): first index where the exp(-2/k) bound applies
  std::size_t rate_start() const;
};

double momentum_next(double beta);
double gamma(double beta, double beta_next);
// Unfloored factor mu_{k+1}/mu_k = b / (q (beta_next/beta)^2 - 1), q = (b(a-1)+a)/(a-1)
double mu_ratio(double beta, double beta_next, const ScheduleParams& params);
double mu_next(double mu, double beta, double beta_next, const ScheduleParams& params);

// State at index k: (beta_k, mu_k). log_mu follows the unfloored recursion in
// log space so that ratios stay exact after mu itself underflows.
struct ScheduleState {
  std::size_t k = 0;
  double beta = 1.0;
  double mu = 1.0;
  double log_mu = 0.0;

  static ScheduleState initial(const ScheduleParams& params);
};

// beta_{k+1} first, then mu_{k+1} from (mu_k, beta_k, beta_{k+1}).
ScheduleState advance(const ScheduleState& s, const ScheduleParams& params);

std::vector<ScheduleState> schedule_trace(const ScheduleParams& params, std::size_t length);

struct RateAudit {
  std::size_t rate_start = 0;
  double limit = 0.0;
  bool exp_bound_ok = true;      // alpha_i <= exp(-2/i) for i >= rate_start
  bool margin_ok = true;         // alpha_i <= limit + 1e-9 for all i
  bool limit_ok = true;          // |alpha_i - limit| shrinks like 1/i over the second half
  bool decay_ok = true;          // mu_i i^2 <= mu_{k0} k0^2 for i >= k0
  std::size_t first_exp_violation = 0;
  std::size_t first_margin_violation = 0;
  std::size_t first_limit_violation = 0;
  std::size_t first_decay_violation = 0;
  double last_ratio = 0.0;

  bool passed() const { return exp_bound_ok && margin_ok && limit_ok && decay_ok; }
  // Throws AuditError naming the first failed check.
  void require() const;
};

// Audits a floor-free (c = 0) trace; element i holds (beta_i, mu_i).
RateAudit mu_rate_audit(std::span<const ScheduleState> trace, const ScheduleParams& params);

}  // namespace nsopt
