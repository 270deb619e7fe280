#include "nsopt/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "nsopt/error.hpp"
#include "nsopt/smoothing.hpp"

namespace nsopt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

class RunContext {
 public:
  RunContext(const RunOptions& opts, const Vector& x0)
      : opts_(opts), start_(Clock::now()), limit_(1e12 * (1.0 + norm(x0))) {
    if (opts.iters < 1) throw Error(ErrorCode::InvalidArgument, "iteration budget must be >= 1");
    require_finite(x0, "initial point");
  }

  void guard(const Vector& x, std::size_t k) const {
    if (!x.all_finite() || norm(x) > limit_) {
      throw Error(ErrorCode::NonFiniteIterate, "iterate left the divergence bound at iteration " + std::to_string(k));
    }
  }

  void emit(std::size_t iter, double objective, double mu, double beta, double stepsize, double gmap) const {
    if (!opts_.sink) return;
    TraceRecord rec;
    rec.iter = iter;
    rec.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    rec.objective = objective;
    rec.gap = opts_.f_ref ? relative_gap(objective, *opts_.f_ref) : kNaN;
    rec.mu = mu;
    rec.beta = beta;
    rec.stepsize = stepsize;
    rec.grad_map_norm = gmap;
    opts_.sink(rec);
  }

 private:
  const RunOptions& opts_;
  Clock::time_point start_;
  double limit_;
};

struct ProxStep {
  Vector y;
  double gmap_norm;
};

// y = prox_{zeta h}(x - zeta grad); zeta == 0 (underflowed) leaves x in place.
ProxStep prox_gradient_step(const Objective& obj, const Vector& x, const Vector& grad, double zeta) {
  if (zeta == 0.0) {
    return {x, norm(grad + obj.h().subgradient(x))};
  }
  Vector w = x;
  axpy(-zeta, grad, w);
  Vector y = obj.h().prox(w, zeta);
  const double g = distance(x, y) / zeta;
  return {std::move(y), g};
}

// Shared accelerated loop; mu_of(k) returns the smoothing level used by step k.
template <class MuRule>
SolverState run_accelerated(const Objective& obj, const Vector& x0, const RunOptions& opts, double beta0,
                            MuRule mu_of) {
  RunContext ctx(opts, x0);
  SolverState st;
  st.x = x0;
  st.y = x0;
  double beta = beta0;
  for (std::size_t k = 0; k < opts.iters; ++k) {
    const double beta_next = momentum_next(beta);
    const double mu = mu_of(k);
    const double zeta = obj.stepsize(mu);
    const double g = gamma(beta, beta_next);
    const ValueGrad vg = obj.f_smoothed(st.x, mu);
    ProxStep step = prox_gradient_step(obj, st.x, vg.grad, zeta);
    Vector x_next = (1.0 - g) * step.y;
    axpy(g, st.y, x_next);
    ctx.guard(x_next, k + 1);
    st.y = std::move(step.y);
    st.x = std::move(x_next);
    beta = beta_next;
    st.stepsize = zeta;
    st.iterations = k + 1;
    st.schedule = ScheduleState{k + 1, beta, mu, std::log(mu)};
    ctx.emit(k + 1, obj.value(st.y), mu, beta, zeta, step.gmap_norm);
  }
  return st;
}

}  // namespace

double relative_gap(double f, double f_ref) {
  const double denom = std::abs(f_ref) < 1e-12 ? 1.0 : std::abs(f_ref);
  return std::abs(f - f_ref) / denom;
}

SolverState run_alg1(const Objective& obj, const ScheduleParams& params, const Vector& x0,
                     const RunOptions& opts, const Alg1Observer& observer) {
  if (x0.size() != obj.dim()) throw Error(ErrorCode::DimensionMismatch, "initial point does not match objective");
  RunContext ctx(opts, x0);
  SolverState st;
  st.x = x0;
  st.y = x0;
  st.schedule = ScheduleState::initial(params);
  for (std::size_t k = 0; k < opts.iters; ++k) {
    const ScheduleState next = advance(st.schedule, params);
    const double zeta = obj.stepsize(next.mu);
    const double g = gamma(st.schedule.beta, next.beta);
    const ValueGrad vg = obj.f_smoothed(st.x, next.mu);
    ProxStep step = prox_gradient_step(obj, st.x, vg.grad, zeta);
    Vector x_next = (1.0 - g) * step.y;
    axpy(g, st.y, x_next);
    ctx.guard(x_next, k + 1);
    if (observer) observer(Alg1Step{k, st.x, st.y, step.y, x_next, st.schedule, next, zeta});
    st.y = std::move(step.y);
    st.x = std::move(x_next);
    st.schedule = next;
    st.stepsize = zeta;
    st.iterations = k + 1;
    ctx.emit(k + 1, obj.value(st.y), next.mu, next.beta, zeta, step.gmap_norm);
  }
  return st;
}

SolverState run_nesterov_smoothing(const Objective& obj, double eps, const Vector& x0, const RunOptions& opts) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "target accuracy must be > 0");
  const double lsq = obj.lipschitz_sq();
  const double mu = lsq > 0.0 ? 2.0 * eps / lsq : 1.0;
  return run_accelerated(obj, x0, opts, 1.0, [mu](std::size_t) { return mu; });
}

SolverState run_tran_dinh(const Objective& obj, double mu0, const Vector& x0, const RunOptions& opts) {
  if (!(mu0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu0 must be > 0");
  return run_accelerated(obj, x0, opts, 1.0,
                         [mu0](std::size_t k) { return mu0 / static_cast<double>(k + 2); });
}

SolverState run_subgradient(const Objective& obj, const Vector& x0, const RunOptions& opts, StepRule rule,
                            double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::NonPositiveStep, "subgradient step scale must be > 0");
  RunContext ctx(opts, x0);
  const ProxTerm& h = obj.h();
  SolverState st;
  st.x = x0;
  st.y = x0;
  double best = obj.value(x0);
  for (std::size_t k = 0; k < opts.iters; ++k) {
    const double kk = static_cast<double>(k + 1);
    const double t = rule == StepRule::InvSqrt ? scale / std::sqrt(kk) : scale / kk;
    Vector g = obj.f_subgradient(st.x);
    if (!h.is_indicator()) g += h.subgradient(st.x);
    Vector x_next = st.x;
    axpy(-t, g, x_next);
    if (h.is_indicator()) x_next = h.prox(x_next, t);
    ctx.guard(x_next, k + 1);
    st.x = std::move(x_next);
    const double fx = obj.value(st.x);
    if (fx < best) {
      best = fx;
      st.y = st.x;
    }
    st.stepsize = t;
    st.iterations = k + 1;
    ctx.emit(k + 1, best, kNaN, kNaN, t, norm(g));
  }
  return st;
}

SolverState run_chambolle_pock(const Objective& obj, const Vector& x0, const RunOptions& opts,
                               std::optional<Vector> y0) {
  const auto split = obj.linear_split();
  if (!split) throw Error(ErrorCode::Unsupported, obj.split_obstacle());
  const Matrix& k_map = *split->k;
  const Vector& d = *split->d;
  RunContext ctx(opts, x0);
  const double knorm = std::sqrt(spectral_norm_sq(k_map));
  const double tau = knorm > 0.0 ? 1.0 / knorm : 1.0;
  const double sigma = tau;
  if (tau * sigma * knorm * knorm > 1.0 + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "primal-dual steps violate tau sigma ||K||^2 <= 1");
  }
  auto project_dual = [&](const Vector& v) {
    if (split->weight == 0.0) return Vector(v.size());
    return split->norm == ResidualNorm::L1 ? project_linf_ball(v, split->weight)
                                           : project_l2_ball(v, split->weight);
  };

  SolverState st;
  st.x = x0;
  st.y = x0;
  st.dual = y0 ? project_dual(*y0) : Vector(k_map.rows());
  if (st.dual.size() != k_map.rows()) throw Error(ErrorCode::DimensionMismatch, "initial dual has wrong length");
  Vector x_bar = x0;
  for (std::size_t it = 0; it < opts.iters; ++it) {
    Vector dual_arg = st.dual;
    axpy(sigma, k_map * x_bar - d, dual_arg);
    st.dual = project_dual(dual_arg);
    Vector primal_arg = st.x;
    axpy(-tau, multiply_transposed(k_map, st.dual), primal_arg);
    Vector x_next = obj.h().prox(primal_arg, tau);
    ctx.guard(x_next, it + 1);
    x_bar = 2.0 * x_next - st.x;
    const double move = distance(x_next, st.x) / tau;
    st.x = std::move(x_next);
    st.y = st.x;
    st.stepsize = tau;
    st.iterations = it + 1;
    ctx.emit(it + 1, obj.value(st.x), kNaN, kNaN, tau, move);
  }
  return st;
}

SolverState run_admm(const Objective& obj, double rho, const Vector& x0, const RunOptions& opts) {
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "ADMM penalty must be > 0");
  const auto split = obj.linear_split();
  if (!split) throw Error(ErrorCode::Unsupported, obj.split_obstacle());
  const Matrix& k_map = *split->k;
  const Vector& d = *split->d;
  RunContext ctx(opts, x0);
  const double lk = spectral_norm_sq(k_map);
  const double lin = lk > 0.0 ? lk : 1.0;
  const double t = 1.0 / (rho * lin);

  auto prox_norm = [&](const Vector& v) {
    const double s = split->weight / rho;
    if (s == 0.0) return v;
    return split->norm == ResidualNorm::L1 ? prox_l1(v, s) : prox_l2norm(v, s);
  };

  SolverState st;
  st.x = x0;
  Vector kx = k_map * x0;
  Vector z = prox_norm(kx - d);
  st.dual = Vector(k_map.rows());  // scaled
  for (std::size_t it = 0; it < opts.iters; ++it) {
    const Vector resid = kx - z - d + st.dual;
    Vector arg = st.x;
    axpy(-1.0 / lin, multiply_transposed(k_map, resid), arg);
    st.x = obj.h().prox(arg, t);
    ctx.guard(st.x, it + 1);
    kx = k_map * st.x;
    z = prox_norm(kx - d + st.dual);
    const Vector primal = kx - z - d;
    st.dual += primal;
    st.y = st.x;
    st.stepsize = t;
    st.iterations = it + 1;
    ctx.emit(it + 1, obj.value(st.x), kNaN, kNaN, t, norm(primal));
  }
  return st;
}

AdmmSweep run_admm_sweep(const Objective& obj, const Vector& x0, const RunOptions& opts,
                         const std::vector<double>& rhos) {
  if (rhos.empty()) throw Error(ErrorCode::InvalidArgument, "ADMM sweep needs at least one penalty");
  AdmmSweep best;
  double best_value = std::numeric_limits<double>::infinity();
  for (double rho : rhos) {
    std::vector<TraceRecord> trace;
    RunOptions local = opts;
    local.sink = [&trace](const TraceRecord& r) { trace.push_back(r); };
    SolverState st = run_admm(obj, rho, x0, local);
    const double v = obj.value(st.y);
    best.final_gaps.emplace_back(rho, opts.f_ref ? relative_gap(v, *opts.f_ref) : v);
    if (v < best_value || best.trace.empty()) {
      best_value = v;
      best.best_rho = rho;
      best.state = std::move(st);
      best.trace = std::move(trace);
    }
  }
  if (opts.sink) {
    for (const auto& r : best.trace) opts.sink(r);
  }
  return best;
}

// ---------------------------------------------------------------- reference

namespace {

// FISTA with function-value restart on F_mu. Returns the final gradient-mapping norm.
double polish_stage(const Objective& obj, double mu, Vector& x, std::size_t max_iters, double tol,
                    std::size_t& used) {
  const double zeta = obj.stepsize(mu);
  Vector y = x;
  Vector x_prev = x;
  double t = 1.0;
  double f_prev = obj.smoothed_value(x, mu);
  double gnorm = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iters; ++it) {
    ++used;
    const ValueGrad vg = obj.f_smoothed(y, mu);
    ProxStep step = prox_gradient_step(obj, y, vg.grad, zeta);
    const double f_new = obj.smoothed_value(step.y, mu);
    // restart on an objective increase or when momentum points against the step
    if (f_new > f_prev || dot(y - step.y, step.y - x) > 0.0) {
      // restart from the last accepted point
      y = x;
      t = 1.0;
      const ValueGrad vx = obj.f_smoothed(x, mu);
      step = prox_gradient_step(obj, x, vx.grad, zeta);
      gnorm = step.gmap_norm;
      x_prev = x;
      x = std::move(step.y);
      f_prev = obj.smoothed_value(x, mu);
    } else {
      gnorm = step.gmap_norm;
      x_prev = x;
      x = std::move(step.y);
      f_prev = f_new;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x;
      axpy((t - 1.0) / t_next, x - x_prev, y);
      t = t_next;
    }
    if (gnorm <= tol) break;
  }
  const ValueGrad vg = obj.f_smoothed(x, mu);
  return prox_gradient_step(obj, x, vg.grad, zeta).gmap_norm;
}

}  // namespace

Reference run_reference(const Objective& obj, double target, const Vector& x0, const ReferenceOptions& options) {
  if (!(target > 0.0)) throw Error(ErrorCode::InvalidArgument, "reference target must be > 0");
  Vector x = x0;
  if (options.alg1_iters > 0) {
    ScheduleParams params;
    params.mu0 = options.mu_start;
    RunOptions ro;
    ro.iters = options.alg1_iters;
    x = run_alg1(obj, params, x0, ro).y;
  }
  const double mu_hi = std::max(options.mu_start, options.mu_end);
  std::vector<double> levels;
  for (double mu = mu_hi; mu > options.mu_end * (1.0 + 1e-12); mu *= 0.1) levels.push_back(mu);
  levels.push_back(options.mu_end);

  Reference ref;
  ref.x = x;
  ref.value = obj.value(x);
  bool certified = false;
  std::size_t used = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double mu = levels[i];
    // the coarsest level may spend three quarters of the budget, the rest is shared evenly
    const std::size_t left = options.polish_iters > used ? options.polish_iters - used : 0;
    const std::size_t budget =
        std::max<std::size_t>(1, i == 0 && levels.size() > 1 ? left / 4 * 3 : left / (levels.size() - i));
    const double g = polish_stage(obj, mu, x, budget, 0.1 * target, used);
    const double v = obj.value(x);
    if (v <= ref.value) {
      ref.x = x;
      ref.value = v;
    }
    // below this per-coordinate size the map is lost to rounding in x - zeta grad
    const double resolution = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, norm_inf(x)) /
                              obj.stepsize(mu) * std::sqrt(static_cast<double>(x.size()));
    // the certificate is the finest resolvable level whose mapping norm meets the target
    if (g <= target && resolution <= target) {
      certified = true;
      ref.grad_map_norm = g;
      ref.mu = mu;
    } else if (!certified) {
      ref.grad_map_norm = g;
      ref.mu = mu;
    }
  }
  ref.certified = certified;
  if (!certified && !options.allow_uncertified) {
    throw Error(ErrorCode::NotCertified, "gradient-mapping norm " + std::to_string(ref.grad_map_norm) +
                                             " above target " + std::to_string(target));
  }
  return ref;
}

double auto_mu0(const Objective& obj, const Vector& x0, const Vector& x_ref) {
  const double lsq = obj.lipschitz_sq();
  if (!(lsq > 0.0)) throw Error(ErrorCode::InvalidArgument, "auto mu0 needs L_f^2 > 0");
  const double mu = obj.map_norm() * distance(x0, x_ref) / std::sqrt(3.0 * lsq);
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "auto mu0 is zero (x0 equals the reference)");
  return mu;
}

// ---------------------------------------------------------------- audits

Alg1Observer Alg1History::recorder() {
  return [this](const Alg1Step& s) {
    if (x.empty()) {
      x.push_back(s.x);
      y.push_back(s.y);
      schedule.push_back(s.before);
    }
    x.push_back(s.x_next);
    y.push_back(s.y_next);
    schedule.push_back(s.after);
  };
}

void Bound7Report::require() const {
  if (!bound_ok) throw AuditError(first_bound_violation, "optimality-gap bound violated");
  if (!lyapunov_ok) throw AuditError(first_lyapunov_violation, "Lyapunov inequality violated");
}

Bound7Report audit_bound7(const Alg1History& h, const Objective& obj, const Vector& x_star, double f_star,
                          const ScheduleParams& params) {
  const std::size_t n = h.x.size();
  if (n < 3 || h.y.size() != n || h.schedule.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "bound audit needs a recorded run of at least 2 iterations");
  }
  const double lsq = obj.lipschitz_sq();
  const double s = params.a * params.b - params.b + params.a;

  std::vector<double> zeta(n - 1), delta(n), u_sq(n);
  for (std::size_t k = 0; k + 1 < n; ++k) zeta[k] = obj.stepsize(h.schedule[k + 1].mu);
  for (std::size_t k = 1; k < n; ++k) {
    delta[k] = obj.smoothed_value(h.y[k], h.schedule[k].mu) - f_star;
    const double b = h.schedule[k].beta;
    Vector u = b * h.x[k];
    axpy(-(b - 1.0), h.y[k], u);
    u -= x_star;
    u_sq[k] = dot(u, u);
  }

  Bound7Report rep;
  const double mu0 = h.schedule[0].mu;
  const double mu1 = h.schedule[1].mu;
  const double b0 = h.schedule[0].beta;
  const double omega0 = mu1 / mu0;
  const double tail = (1.0 - omega0) * s * 0.5 * mu0 * lsq * zeta[0] * b0 * b0;
  const double e_zeta = u_sq[1] + zeta[0] * b0 * b0 * delta[1] + tail;
  const double e_tel = u_sq[1] + 2.0 * zeta[0] * b0 * b0 * delta[1] + 2.0 * tail;
  // mu/zeta is the curvature scale when zeta = mu / L_A
  const double scale = mu1 / zeta[0];
  rep.e_printed = scale * e_zeta;
  rep.e_telescoped = scale * e_tel;

  constexpr double kRel = 1e-8;
  const double abs_floor = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f_star));
  for (std::size_t t = 1; t + 1 < n; ++t) {
    const double bt = h.schedule[t].beta;
    const double mu_next = h.schedule[t + 1].mu;
    const double rhs = 0.5 * lsq * mu_next + e_zeta / (2.0 * bt * bt * zeta[t]);
    const double lhs = obj.value(h.y[t + 1]) - f_star;
    if (rhs > 0.0) rep.worst_bound_ratio = std::max(rep.worst_bound_ratio, lhs / rhs);
    if (!(lhs <= rhs + kRel * std::abs(rhs) + abs_floor)) {
      if (rep.bound_ok) rep.first_bound_violation = t;
      rep.bound_ok = false;
    }
  }

  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k] < 0.0) ++rep.negative_delta;
    const double bk = h.schedule[k].beta;
    const double bp = h.schedule[k - 1].beta;
    const double mu_k = h.schedule[k].mu;
    const double mu_p = h.schedule[k - 1].mu;
    const double mu_n = h.schedule[k + 1].mu;
    const double omega_p = mu_k / mu_p;
    const double omega_k = mu_n / mu_k;
    const double a1 = zeta[k] * bk * bk * delta[k + 1];
    const double a2 = zeta[k - 1] * bp * bp * delta[k];
    const double rhs = 0.5 * (u_sq[k] - u_sq[k + 1]);
    const double mag = std::abs(a1) + std::abs(a2) + 0.5 * (u_sq[k] + u_sq[k + 1]);
    const double slack = kRel * mag + 1e-300;

    const double inc_lhs = a1 - a2 - 0.5 * (mu_k - mu_n) * lsq * zeta[k] * bp * bp;
    if (!(inc_lhs <= rhs + slack)) {
      if (rep.increment_ok) rep.first_increment_violation = k;
      rep.increment_ok = false;
      ++rep.increment_violations;
    }
    const double lyap_lhs = a1 - a2 - (1.0 - omega_p) * s * 0.5 * mu_p * lsq * zeta[k - 1] * bp * bp +
                            (1.0 - omega_k) * s * 0.5 * mu_k * lsq * zeta[k] * bk * bk;
    if (!(lyap_lhs <= rhs + slack + kRel * std::abs(lyap_lhs - a1 + a2))) {
      if (rep.lyapunov_ok) rep.first_lyapunov_violation = k;
      rep.lyapunov_ok = false;
      ++rep.lyapunov_violations;
    }
  }
  return rep;
}

std::optional<std::size_t> first_reaching(const Alg1History& h, const Objective& obj, double f_star, double eps) {
  for (std::size_t t = 1; t < h.y.size(); ++t) {
    if (obj.value(h.y[t]) - f_star <= eps) return t;
  }
  return std::nullopt;
}

}  // namespace nsopt
