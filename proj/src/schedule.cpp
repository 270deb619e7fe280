#include "nsopt/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsopt/error.hpp"

namespace nsopt {

void ScheduleParams::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(a > 1.0) || !std::isfinite(a)) bad("schedule needs a > 1");
  if (!(b > 0.0) || !std::isfinite(b)) bad("schedule needs b > 0");
  if (!(c >= 0.0) || !std::isfinite(c)) bad("schedule needs c >= 0");
  if (!(mu0 > 0.0) || !std::isfinite(mu0)) bad("schedule needs mu0 > 0");
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) bad("schedule needs beta0 > 0");
}

double ScheduleParams::limit_ratio() const {
  const double ba = b * (a - 1.0);
  return ba / (ba + 1.0);
}

std::size_t ScheduleParams::rate_start() const {
  return static_cast<std::size_t>(std::ceil(2.0 / std::log1p(1.0 / (b * (a - 1.0)))));
}

double momentum_next(double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "momentum needs beta > 0");
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * beta * beta));
}

double gamma(double beta, double beta_next) {
  if (!(beta_next > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma needs beta_next > 0");
  return (1.0 - beta) / beta_next;
}

double mu_ratio(double beta, double beta_next, const ScheduleParams& p) {
  const double q = (p.b * (p.a - 1.0) + p.a) / (p.a - 1.0);
  const double r = beta_next / beta;
  const double denom = q * r * r - 1.0;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(ErrorCode::DegenerateDenominator, "smoothing update denominator " + std::to_string(denom));
  }
  return p.b / denom;
}

double mu_next(double mu, double beta, double beta_next, const ScheduleParams& params) {
  return std::max(mu * mu_ratio(beta, beta_next, params), params.c);
}

ScheduleState ScheduleState::initial(const ScheduleParams& params) {
  params.validate();
  return ScheduleState{0, params.beta0, params.mu0, std::log(params.mu0)};
}

ScheduleState advance(const ScheduleState& s, const ScheduleParams& params) {
  const double beta_next = momentum_next(s.beta);
  const double ratio = mu_ratio(s.beta, beta_next, params);
  ScheduleState next;
  next.k = s.k + 1;
  next.beta = beta_next;
  next.mu = std::max(s.mu * ratio, params.c);
  next.log_mu = params.c > 0.0 ? std::log(next.mu) : s.log_mu + std::log(ratio);
  return next;
}

std::vector<ScheduleState> schedule_trace(const ScheduleParams& params, std::size_t length) {
  std::vector<ScheduleState> out;
  out.reserve(length);
  out.push_back(ScheduleState::initial(params));
  while (out.size() < length) out.push_back(advance(out.back(), params));
  return out;
}

void RateAudit::require() const {
  if (!exp_bound_ok) throw AuditError(first_exp_violation, "mu ratio above exp(-2/k)");
  if (!margin_ok) throw AuditError(first_margin_violation, "mu ratio above its limit");
  if (!limit_ok) throw AuditError(first_limit_violation, "mu ratio not converging to its limit");
  if (!decay_ok) throw AuditError(first_decay_violation, "mu_k k^2 increased");
}

RateAudit mu_rate_audit(std::span<const ScheduleState> trace, const ScheduleParams& params) {
  params.validate();
  if (params.c > 0.0) {
    throw Error(ErrorCode::InvalidArgument, "rate audit needs a floor-free trace (c = 0)");
  }
  if (trace.size() < 50) throw Error(ErrorCode::InvalidArgument, "rate audit needs at least 50 entries");

  RateAudit out;
  out.rate_start = params.rate_start();
  out.limit = params.limit_ratio();
  const double q = (params.b * (params.a - 1.0) + params.a) / (params.a - 1.0);
  // alpha_i = L (1 - 2q/((q-1) i) + O(1/i^2)); allow 25% on the leading term
  const double limit_slope = 1.25 * out.limit * 2.0 * q / (q - 1.0);

  auto flag = [](bool& ok, std::size_t& at, std::size_t i) {
    if (ok) at = i;
    ok = false;
  };

  const std::size_t k0 = out.rate_start;
  const double anchor = k0 < trace.size()
                            ? trace[k0].log_mu + 2.0 * std::log(static_cast<double>(k0))
                            : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    if (trace[i].k != i) throw Error(ErrorCode::InvalidArgument, "rate audit trace must start at index 0");
    const double log_ratio = trace[i + 1].log_mu - trace[i].log_mu;
    const double alpha = std::exp(log_ratio);
    out.last_ratio = alpha;
    if (!(alpha <= out.limit + 1e-9)) flag(out.margin_ok, out.first_margin_violation, i);
    if (i >= k0 && i > 0 && !(log_ratio <= -2.0 / static_cast<double>(i))) {
      flag(out.exp_bound_ok, out.first_exp_violation, i);
    }
    if (2 * i >= trace.size() && !(std::abs(alpha - out.limit) * static_cast<double>(i) <= limit_slope)) {
      flag(out.limit_ok, out.first_limit_violation, i);
    }
  }
  for (std::size_t i = k0 + 1; i < trace.size(); ++i) {
    const double scaled = trace[i].log_mu + 2.0 * std::log(static_cast<double>(i));
    if (!(scaled <= anchor + 1e-9)) flag(out.decay_ok, out.first_decay_violation, i);
  }
  return out;
}

}  // namespace nsopt
