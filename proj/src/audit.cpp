#include "nsopt/audit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "nsopt/error.hpp"
#include "nsopt/problems.hpp"
#include "nsopt/prox.hpp"
#include "nsopt/schedule.hpp"
#include "nsopt/smoothing.hpp"
#include "nsopt/solvers.hpp"

namespace nsopt {

namespace {

class Collector {
 public:
  explicit Collector(std::string suite) : suite_(std::move(suite)) {}

  void add(const std::string& name, bool pass, const std::string& detail) {
    lines_.push_back({suite_, name, pass, detail});
  }

  // Runs `body`, which returns an empty string on success or a counterexample.
  void check(const std::string& name, const std::function<std::string()>& body, const std::string& summary = "") {
    try {
      const std::string bad = body();
      add(name, bad.empty(), bad.empty() ? summary : bad);
    } catch (const std::exception& e) {
      add(name, false, std::string("threw ") + e.what());
    }
  }

  std::vector<AuditLine> take() { return std::move(lines_); }

 private:
  std::string suite_;
  std::vector<AuditLine> lines_;
};

template <class... Args>
std::string str(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  return os.str();
}

Vector random_vector(Rng& rng, std::size_t n, double scale) {
  Vector v = gaussian_vector(rng, n);
  v *= scale;
  return v;
}

double rel_err(const Vector& a, const Vector& b) { return distance(a, b) / std::max(1.0, norm(b)); }

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------- schedule

std::vector<AuditLine> audit_schedule(std::uint64_t seed) {
  Collector c("schedule");
  c.check("momentum identity beta_{k+1}^2 - beta_{k+1} = beta_k^2", [] {
    double beta = 1.0;
    for (std::size_t k = 0; k < 100000; ++k) {
      const double next = momentum_next(beta);
      const double err = std::abs(next * next - next - beta * beta) / (next * next);
      if (!(err <= 1e-9)) return str("k=", k, " relative error ", err);
      beta = next;
    }
    return std::string();
  }, "k <= 1e5");
  c.check("momentum lower bound beta_k >= k/2", [] {
    double beta = 1.0;
    for (std::size_t k = 0; k <= 100000; ++k) {
      if (!(beta >= 0.5 * static_cast<double>(k))) return str("k=", k, " beta=", beta);
      beta = momentum_next(beta);
    }
    return std::string();
  }, "k <= 1e5");

  const ScheduleParams defaults;
  const auto trace = schedule_trace(defaults, 10000);
  const RateAudit rate = mu_rate_audit(trace, defaults);
  c.add("mu ratio <= exp(-2/k) for k >= k0", rate.exp_bound_ok,
        rate.exp_bound_ok ? "k <= 1e4" : str("first violation at k=", rate.first_exp_violation));
  c.add("mu ratio <= 1/2 + 1e-9", rate.margin_ok,
        rate.margin_ok ? "k <= 1e4" : str("first violation at k=", rate.first_margin_violation));
  c.add("mu ratio approaches 1/2 at rate 1/k", rate.limit_ok,
        rate.limit_ok ? str("ratio at k=1e4: ", rate.last_ratio)
                      : str("first violation at k=", rate.first_limit_violation));
  c.add("mu_k k^2 nonincreasing after k0", rate.decay_ok,
        rate.decay_ok ? "k <= 1e4" : str("first violation at k=", rate.first_decay_violation));

  c.check("generalized (a, b) ratios stay under their limit", [seed] {
    Rng rng(seed);
    for (int trial = 0; trial < 25; ++trial) {
      ScheduleParams p;
      p.a = 1.1 + 3.0 * rng.uniform();
      p.b = 0.2 + 3.0 * rng.uniform();
      p.mu0 = std::exp(4.0 * rng.normal());
      const RateAudit r = mu_rate_audit(schedule_trace(p, 2000), p);
      if (!r.margin_ok) return str("a=", p.a, " b=", p.b, " k=", r.first_margin_violation);
      if (!r.exp_bound_ok) return str("a=", p.a, " b=", p.b, " exp bound fails at k=", r.first_exp_violation);
    }
    return std::string();
  }, "25 seeded (a, b) pairs");

  c.check("floor c is respected and reached", [seed] {
    Rng rng(seed ^ 0x5eed);
    for (int trial = 0; trial < 25; ++trial) {
      ScheduleParams p;
      p.mu0 = std::exp(2.0 * rng.normal());
      p.c = p.mu0 * std::exp(-10.0 * rng.uniform());
      const auto t = schedule_trace(p, 500);
      bool hit = false;
      for (const auto& s : t) {
        if (!(s.mu >= p.c)) return str("mu=", s.mu, " below c=", p.c, " at k=", s.k);
        if (hit && s.mu != p.c) return str("mu left the floor at k=", s.k);
        hit = hit || s.mu == p.c;
      }
      if (!hit) return str("floor c=", p.c, " never reached from mu0=", p.mu0);
    }
    return std::string();
  }, "25 seeded floors");
  return c.take();
}

// ---------------------------------------------------------------- smoothing

std::vector<AuditLine> audit_smoothing(std::uint64_t seed) {
  Collector c("smoothing");
  const double mus[] = {1.0, 0.1, 0.01};

  c.check("Moreau sandwich f_mu <= f <= f_mu + mu L^2/2", [seed, &mus] {
    Rng rng(seed);
    const ProxTerm terms[] = {ProxTerm::l1(1.0), ProxTerm::l2norm(1.0), ProxTerm::l1(2.5), ProxTerm::l2norm(0.3)};
    for (int i = 0; i < 1000; ++i) {
      const ProxTerm& t = terms[i % 4];
      const double mu = mus[i % 3];
      const Vector x = random_vector(rng, 1 + i % 7, std::exp(2.0 * rng.normal()));
      const BoundCheck b = uniform_bound_check(t, x, mu);
      if (!b.lower_ok || !b.upper_ok) return str(to_string(t.kind), " mu=", mu, " f=", b.f, " f_mu=", b.f_mu);
    }
    return std::string();
  }, "1000 seeded points");

  c.check("smoothed residual sandwich", [seed, &mus] {
    Rng rng(seed + 1);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t m = 1 + i % 9;
      const double mu = mus[i % 3];
      const Vector r = random_vector(rng, m, std::exp(2.0 * rng.normal()));
      for (ResidualNorm kind : {ResidualNorm::L1, ResidualNorm::L2}) {
        const double f = kind == ResidualNorm::L1 ? norm1(r) : norm(r);
        const double lsq = kind == ResidualNorm::L1 ? static_cast<double>(m) : 1.0;
        const double fm = smoothed_norm(r, mu, kind).value;
        if (!(fm <= f + kBoundSlack) || !(f <= fm + 0.5 * mu * lsq + kBoundSlack)) {
          return str("m=", m, " mu=", mu, " f=", f, " f_mu=", fm);
        }
      }
    }
    return std::string();
  }, "1000 seeded residuals, both norms");

  c.check("spectral smoothing within [0, mu log n] of lambda_max", [seed, &mus] {
    Rng rng(seed + 2);
    for (int i = 0; i < 200; ++i) {
      const std::size_t n = 2 + i % 6;
      const Matrix g = gaussian(rng, n, n);
      const Matrix x = g + g.transpose();
      const double mu = mus[i % 3];
      const SpectralMax s = spectral_max_value_grad(x, mu);
      const double gap = s.value - s.eig.values[0];
      if (!(gap >= -kBoundSlack) || !(gap <= mu * std::log(static_cast<double>(n)) + kBoundSlack)) {
        return str("n=", n, " mu=", mu, " value - lambda_max = ", gap);
      }
    }
    return std::string();
  }, "200 seeded symmetric matrices");

  c.check("gradients match central differences", [seed, &mus] {
    Rng rng(seed + 3);
    for (int i = 0; i < 60; ++i) {
      const double mu = mus[i % 3];
      const std::size_t n = 2 + i % 5;
      const Vector x = random_vector(rng, n, 2.0);
      for (const ProxTerm& t : {ProxTerm::l1(1.0), ProxTerm::l2norm(1.0)}) {
        const Vector g = moreau_grad(t, x, mu);
        const Vector fd = central_difference([&](const Vector& v) { return moreau_value(t, v, mu); }, x);
        if (rel_err(g, fd) > 1e-5) return str("Moreau ", to_string(t.kind), " mu=", mu, " err=", rel_err(g, fd));
      }
      const Matrix a = gaussian(rng, n + 1, n);
      const Vector b = random_vector(rng, n + 1, 1.0);
      for (ResidualNorm kind : {ResidualNorm::L1, ResidualNorm::L2}) {
        const Vector g = smoothed_residual_grad(a, b, x, mu, kind).grad;
        const Vector fd = central_difference(
            [&](const Vector& v) { return smoothed_residual_grad(a, b, v, mu, kind).value; }, x);
        if (rel_err(g, fd) > 1e-5) return str("residual mu=", mu, " err=", rel_err(g, fd));
      }
      const Matrix s0 = gaussian(rng, n, n);
      const Matrix sym = s0 + s0.transpose();
      auto spec = [&](const Vector& y) {
        Matrix m = sym;
        for (std::size_t k = 0; k < n; ++k) m(k, k) += y[k];
        return spectral_max_value_grad(m, mu).value;
      };
      Matrix m = sym;
      for (std::size_t k = 0; k < n; ++k) m(k, k) += x[k];
      const Vector g = spectral_max_value_grad(m, mu).grad.diag();
      const Vector fd = central_difference(spec, x);
      if (rel_err(g, fd) > 1e-5) return str("spectral mu=", mu, " err=", rel_err(g, fd));
    }
    return std::string();
  }, "60 seeded points per oracle");

  c.check("spectral gradient is PSD with unit trace", [seed, &mus] {
    Rng rng(seed + 4);
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = 2 + i % 8;
      const Matrix g = gaussian(rng, n, n);
      const SpectralMax s = spectral_max_value_grad(g + g.transpose(), mus[i % 3]);
      double tr = 0.0;
      for (std::size_t k = 0; k < n; ++k) tr += s.grad(k, k);
      const double lo = sym_eig(s.grad).values[n - 1];
      if (std::abs(tr - 1.0) > 1e-10 || lo < -1e-10) return str("trace=", tr, " min eig=", lo);
    }
    return std::string();
  }, "100 seeded matrices");

  c.check("smoothed residual gradient is (L_A / mu)-Lipschitz", [seed, &mus] {
    Rng rng(seed + 5);
    for (int i = 0; i < 500; ++i) {
      const std::size_t n = 2 + i % 6;
      const Matrix a = gaussian(rng, n + 2, n);
      const Vector b = random_vector(rng, n + 2, 1.0);
      const double mu = mus[i % 3];
      const double la = spectral_norm_sq(a);
      const ResidualNorm kind = i % 2 ? ResidualNorm::L1 : ResidualNorm::L2;
      const Vector x = random_vector(rng, n, 1.0);
      const Vector y = x + random_vector(rng, n, std::exp(rng.normal() - 2.0));
      const double lip = distance(smoothed_residual_grad(a, b, x, mu, kind).grad,
                                  smoothed_residual_grad(a, b, y, mu, kind).grad) /
                         distance(x, y);
      if (!(lip <= la / mu + 1e-6)) return str("ratio ", lip, " above L_A/mu = ", la / mu);
    }
    return std::string();
  }, "500 seeded pairs");
  return c.take();
}

// ---------------------------------------------------------------- prox

std::vector<AuditLine> audit_prox(std::uint64_t seed) {
  Collector c("prox");
  struct Case {
    std::string name;
    std::function<ProxTerm(Rng&, std::size_t)> make;
  };
  const std::vector<Case> cases = {
      {"l1", [](Rng& r, std::size_t) { return ProxTerm::l1(0.1 + 2.0 * r.uniform()); }},
      {"l2norm", [](Rng& r, std::size_t) { return ProxTerm::l2norm(0.1 + 2.0 * r.uniform()); }},
      {"squared_l2", [](Rng& r, std::size_t) { return ProxTerm::squared_l2(0.1 + 2.0 * r.uniform()); }},
      {"linf_ball", [](Rng& r, std::size_t) { return ProxTerm::linf_ball(0.1 + 2.0 * r.uniform()); }},
      {"l2_ball", [](Rng& r, std::size_t) { return ProxTerm::l2_ball(0.1 + 2.0 * r.uniform()); }},
      {"box",
       [](Rng& r, std::size_t n) {
         Vector lo(n), hi(n);
         for (std::size_t i = 0; i < n; ++i) {
           lo[i] = -2.0 * r.uniform();
           hi[i] = lo[i] + 3.0 * r.uniform();
         }
         return ProxTerm::box(lo, hi);
       }},
      {"nuclear", [](Rng& r, std::size_t) { return ProxTerm::nuclear(2, 3, 0.1 + 2.0 * r.uniform()); }},
  };

  for (const auto& cs : cases) {
    c.check("prox " + cs.name + " minimizes t g(u) + |u - x|^2 / 2", [&, seed] {
      Rng rng(seed);
      for (int i = 0; i < 200; ++i) {
        const std::size_t n = cs.name == "nuclear" ? 6 : 1 + i % 6;
        const ProxTerm term = cs.make(rng, n);
        const Vector x = random_vector(rng, n, 2.0);
        const double t = 0.05 + 2.0 * rng.uniform();
        const Vector p = term.prox(x, t);
        auto obj = [&](const Vector& u) {
          const double d = distance(u, x);
          return t * term.value(u) + 0.5 * d * d;
        };
        const double at_p = obj(p);
        if (!std::isfinite(at_p)) return str("prox left the domain at trial ", i);
        for (int j = 0; j < 20; ++j) {
          const Vector q = p + random_vector(rng, n, std::pow(10.0, -1.0 - 3.0 * rng.uniform()));
          if (obj(q) < at_p - 1e-12 * std::max(1.0, at_p)) {
            return str("trial ", i, ": perturbation improves ", at_p, " to ", obj(q));
          }
        }
      }
      return std::string();
    }, "200 seeded inputs");
    c.check("prox " + cs.name + " is nonexpansive", [&, seed] {
      Rng rng(seed + 7);
      for (int i = 0; i < 200; ++i) {
        const std::size_t n = cs.name == "nuclear" ? 6 : 1 + i % 6;
        const ProxTerm term = cs.make(rng, n);
        const double t = 0.05 + 2.0 * rng.uniform();
        const Vector x = random_vector(rng, n, 2.0);
        const Vector y = random_vector(rng, n, 2.0);
        if (distance(term.prox(x, t), term.prox(y, t)) > distance(x, y) * (1.0 + 1e-12) + 1e-14) {
          return str("trial ", i);
        }
      }
      return std::string();
    }, "200 seeded pairs");
  }

  c.check("Moreau decomposition for l1 and l2 norms", [seed] {
    Rng rng(seed + 11);
    for (int i = 0; i < 200; ++i) {
      const Vector x = random_vector(rng, 1 + i % 6, 3.0);
      const double t = 0.05 + 2.0 * rng.uniform();
      const Vector s1 = prox_l1(x, t) + t * project_linf_ball((1.0 / t) * x, 1.0);
      const Vector s2 = prox_l2norm(x, t) + t * project_l2_ball((1.0 / t) * x, 1.0);
      if (distance(s1, x) > 1e-12 * std::max(1.0, norm(x)) || distance(s2, x) > 1e-12 * std::max(1.0, norm(x))) {
        return str("trial ", i);
      }
    }
    return std::string();
  }, "200 seeded inputs");
  return c.take();
}

// ---------------------------------------------------------------- solver audits

struct LassoCase {
  ProblemInstance inst;
  std::unique_ptr<Objective> obj;
  Vector x0;
  Reference ref;
};

LassoCase seeded_lasso(std::uint64_t seed) {
  LassoOptions o;
  o.n = 20;
  o.m = 20;
  o.seed = seed;
  LassoCase lc{gen_lasso(o), nullptr, {}, {}};
  lc.obj = make_objective(lc.inst);
  lc.x0 = initial_point(lc.inst, seed);
  ReferenceOptions ro;
  ro.alg1_iters = 10000;
  lc.ref = run_reference(*lc.obj, 1e-6, lc.x0, ro);
  return lc;
}

std::vector<AuditLine> audit_bound7(std::uint64_t seed) {
  Collector c("bound7");
  LassoCase lc;
  try {
    lc = seeded_lasso(seed);
  } catch (const std::exception& e) {
    c.add("reference optimum", false, e.what());
    return c.take();
  }
  c.add("reference optimum", true, str("F* = ", lc.ref.value, ", mapping norm ", lc.ref.grad_map_norm));
  const double eps = 1e-2;
  const double lsq = lc.obj->lipschitz_sq();
  ScheduleParams p;
  p.c = eps / lsq;
  p.mu0 = auto_mu0(*lc.obj, lc.x0, lc.ref.x);

  // the predicted iteration count needs E, which the first step fixes; run until
  // the gap reaches eps or the predicted count is exceeded
  Alg1History h;
  RunOptions ro;
  ro.iters = 2000;
  run_alg1(*lc.obj, p, lc.x0, ro, h.recorder());
  Bound7Report rep = audit_bound7(h, *lc.obj, lc.ref.x, lc.ref.value, p);
  const double t_bound = 2.0 * std::sqrt(lsq) * std::sqrt(rep.e_printed) / eps;
  auto reached = first_reaching(h, *lc.obj, lc.ref.value, eps);
  if (!reached && static_cast<double>(ro.iters) < t_bound + 1.0) {
    h = Alg1History{};
    ro.iters = static_cast<std::size_t>(std::ceil(t_bound)) + 1;
    run_alg1(*lc.obj, p, lc.x0, ro, h.recorder());
    rep = audit_bound7(h, *lc.obj, lc.ref.x, lc.ref.value, p);
    reached = first_reaching(h, *lc.obj, lc.ref.value, eps);
  }
  c.add("optimality-gap bound at every T", rep.bound_ok,
        rep.bound_ok ? str(ro.iters, " iterations, worst lhs/rhs ", rep.worst_bound_ratio)
                     : str("first violation at T=", rep.first_bound_violation));
  c.add("Lyapunov inequality per iteration", rep.lyapunov_ok,
        rep.lyapunov_ok ? str("steps with F_mu(y_k) < F*: ", rep.negative_delta)
                        : str(rep.lyapunov_violations, " violations, first at k=", rep.first_lyapunov_violation,
                              "; steps with F_mu(y_k) < F*: ", rep.negative_delta));
  const bool count_ok = reached && static_cast<double>(*reached) <= t_bound;
  c.add("iterations to reach eps within 2 L_f sqrt(E) / eps", count_ok,
        reached ? str("T=", *reached, ", bound ", t_bound) : str("gap never reached eps; bound ", t_bound));
  return c.take();
}

std::vector<AuditLine> audit_tail_rate(std::uint64_t seed) {
  Collector c("tail-rate");
  LassoCase lc;
  try {
    lc = seeded_lasso(seed);
  } catch (const std::exception& e) {
    c.add("reference optimum", false, e.what());
    return c.take();
  }
  ScheduleParams p;
  p.mu0 = auto_mu0(*lc.obj, lc.x0, lc.ref.x);
  std::vector<double> gaps;
  RunOptions ro;
  ro.iters = 10000;
  ro.f_ref = lc.ref.value;
  ro.sink = [&gaps](const TraceRecord& r) { gaps.push_back(r.gap); };
  run_alg1(*lc.obj, p, lc.x0, ro);
  const double final_gap = gaps.back();
  c.add("final relative gap <= 1e-6", final_gap <= 1e-6, str("gap ", final_gap, " after 1e4 iterations"));
  double worst = 0.0;
  std::size_t worst_at = 0;
  for (std::size_t k = gaps.size() - 2000; k + 500 < gaps.size(); ++k) {
    const double ratio = gaps[k] == 0.0 ? (gaps[k + 500] == 0.0 ? 0.0 : INFINITY) : gaps[k + 500] / gaps[k];
    if (ratio > worst || k == gaps.size() - 2000) {
      worst = ratio;
      worst_at = k + 1;
    }
  }
  c.add("gap_{k+500} / gap_k <= 0.9 over the last 2000 iterations", worst <= 0.9,
        str("worst ratio ", worst, " at k=", worst_at));
  return c.take();
}

}  // namespace

std::vector<std::string_view> audit_suites() { return {"schedule", "smoothing", "prox", "bound7", "tail-rate"}; }

std::vector<AuditLine> run_audit(std::string_view suite, std::uint64_t seed) {
  if (suite == "all") {
    std::vector<AuditLine> all;
    for (auto s : audit_suites()) {
      auto part = run_audit(s, seed);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  if (suite == "schedule") return audit_schedule(seed);
  if (suite == "smoothing") return audit_smoothing(seed);
  if (suite == "prox") return audit_prox(seed);
  if (suite == "bound7") return audit_bound7(seed);
  if (suite == "tail-rate") return audit_tail_rate(seed);
  throw Error(ErrorCode::InvalidArgument, "unknown audit suite '" + std::string(suite) + "'");
}

}  // namespace nsopt
