#include <cmath>

#include "doctest.h"
#include "nsopt/error.hpp"
#include "nsopt/schedule.hpp"
#include "oracles.hpp"

using namespace nsopt;

TEST_SUITE("schedule") {

TEST_CASE("momentum examples against the long-double recursion") {
  const long double b1 = oracle::momentum_ld(1.0L);
  const long double b2 = oracle::momentum_ld(b1);
  CHECK(momentum_next(1.0) == doctest::Approx(static_cast<double>(b1)).epsilon(1e-15));
  CHECK(momentum_next(momentum_next(1.0)) == doctest::Approx(static_cast<double>(b2)).epsilon(1e-15));
  CHECK(momentum_next(1.0) == doctest::Approx(1.6180).epsilon(1e-4));
  CHECK(momentum_next(momentum_next(1.0)) == doctest::Approx(2.1936).epsilon(1e-4));
  for (double beta : {0.3, 1.0, 7.5, 1e4}) {
    const double next = momentum_next(beta);
    CHECK(next > beta);
    CHECK(std::abs(next * next - next - beta * beta) <= 1e-12 * std::max(1.0, beta * beta));
  }
  CHECK_THROWS_AS(momentum_next(0.0), Error);
}

TEST_CASE("gamma examples") {
  CHECK(gamma(1.0, 1.6180) == 0.0);
  CHECK(gamma(1.0, 123.0) == 0.0);
  CHECK(gamma(1.6180, 2.1936) == doctest::Approx(-0.2817).epsilon(1e-3));
  CHECK(gamma(0.5, 1.0) == 0.5);
  CHECK(gamma(4.0, 5.0) <= 0.0);
  CHECK_THROWS_AS(gamma(1.0, 0.0), Error);
}

TEST_CASE("mu_next examples against the long-double recursion") {
  const ScheduleParams p;  // (a, b, c) = (2, 1, 0)
  const long double b0 = 1.0L;
  const long double b1 = oracle::momentum_ld(b0);
  const long double b2 = oracle::momentum_ld(b1);
  const long double m1 = oracle::mu_next_ld(1.0L, b0, b1, 2.0L, 1.0L);
  const long double m2 = oracle::mu_next_ld(m1, b1, b2, 2.0L, 1.0L);
  const double mu1 = mu_next(1.0, 1.0, static_cast<double>(b1), p);
  const double mu2 = mu_next(mu1, static_cast<double>(b1), static_cast<double>(b2), p);
  CHECK(std::abs(mu1 - static_cast<double>(m1)) <= 1e-15);
  CHECK(std::abs(mu2 - static_cast<double>(m2)) <= 1e-15);
  CHECK(mu1 == doctest::Approx(0.14590).epsilon(1e-4));
  CHECK(mu2 == doctest::Approx(0.032318).epsilon(1e-4));

  ScheduleParams floored;
  floored.c = 1e-3;
  CHECK(mu_next(1e-9, 3.0, momentum_next(3.0), floored) == 1e-3);
}

TEST_CASE("mu_ratio rejects a non-positive denominator") {
  try {
    mu_ratio(1.0, 0.5, ScheduleParams{});
    FAIL("expected DegenerateDenominator");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDenominator);
  }
}

TEST_CASE("parameter validation") {
  auto rejects = [](ScheduleParams p) { CHECK_THROWS_AS(p.validate(), Error); };
  ScheduleParams p;
  p.a = 1.0;
  rejects(p);
  p = {};
  p.b = 0.0;
  rejects(p);
  p = {};
  p.c = -1.0;
  rejects(p);
  p = {};
  p.mu0 = 0.0;
  rejects(p);
  p = {};
  p.beta0 = NAN;
  rejects(p);
  CHECK_NOTHROW(ScheduleParams{}.validate());
  CHECK(ScheduleParams{}.limit_ratio() == 0.5);
  CHECK(ScheduleParams{}.rate_start() == 3);
}

TEST_CASE("advance matches the stepwise recursion") {
  ScheduleParams p;
  p.mu0 = 2.5;
  ScheduleState s = ScheduleState::initial(p);
  long double beta = 1.0L, mu = 2.5L;
  for (int k = 0; k < 60; ++k) {
    const ScheduleState next = advance(s, p);
    const long double beta_next = oracle::momentum_ld(beta);
    mu = oracle::mu_next_ld(mu, beta, beta_next, 2.0L, 1.0L);
    beta = beta_next;
    CHECK(next.k == s.k + 1);
    CHECK(std::abs(next.beta - static_cast<double>(beta)) <= 1e-13 * static_cast<double>(beta));
    CHECK(std::abs(next.mu - static_cast<double>(mu)) <= 1e-12 * static_cast<double>(mu));
    CHECK(std::abs(next.log_mu - std::log(next.mu)) <= 1e-12 * std::max(1.0, std::abs(next.log_mu)));
    s = next;
  }
}

TEST_CASE("momentum identity and beta_k >= k/2 up to 1e5") {
  ScheduleState s = ScheduleState::initial(ScheduleParams{});
  const ScheduleParams p;
  bool identity_ok = true, growth_ok = true;
  for (std::size_t k = 0; k < 100000; ++k) {
    const ScheduleState next = advance(s, p);
    const double lhs = next.beta * next.beta - next.beta;
    identity_ok = identity_ok && std::abs(lhs - s.beta * s.beta) <= 1e-9 * s.beta * s.beta;
    growth_ok = growth_ok && next.beta >= 0.5 * static_cast<double>(next.k);
    s = next;
  }
  CHECK(identity_ok);
  CHECK(growth_ok);
}

TEST_CASE("log_mu keeps exact ratios after mu underflows") {
  const auto trace = schedule_trace(ScheduleParams{}, 3000);
  CHECK(trace.back().mu == 0.0);
  CHECK(std::isfinite(trace.back().log_mu));
  const double ratio = std::exp(trace[2999].log_mu - trace[2998].log_mu);
  CHECK(ratio == doctest::Approx(mu_ratio(trace[2998].beta, trace[2999].beta, ScheduleParams{})).epsilon(1e-9));
}

TEST_CASE("rate audit passes on the default trace of length 500") {
  const auto trace = schedule_trace(ScheduleParams{}, 500);
  const RateAudit a = mu_rate_audit(trace, ScheduleParams{});
  CHECK(a.exp_bound_ok);
  CHECK(a.margin_ok);
  CHECK(a.limit_ok);
  CHECK(a.decay_ok);
  CHECK_NOTHROW(a.require());
}

TEST_CASE("rate audit bounds on the 1e4 default trace") {
  const ScheduleParams p;
  const auto trace = schedule_trace(p, 10001);
  bool exp_ok = true, margin_ok = true, positive = true;
  for (std::size_t k = 3; k < 10000; ++k) {
    const double alpha = std::exp(trace[k + 1].log_mu - trace[k].log_mu);
    exp_ok = exp_ok && alpha <= std::exp(-2.0 / static_cast<double>(k));
    margin_ok = margin_ok && alpha <= 0.5 + 1e-9;
    positive = positive && alpha > 0.0;
  }
  CHECK(exp_ok);
  CHECK(margin_ok);
  CHECK(positive);
  CHECK(mu_rate_audit(trace, p).passed());
}

TEST_CASE("rate audit rejects floored or short traces") {
  ScheduleParams floored;
  floored.c = 1e-3;
  const auto trace = schedule_trace(floored, 100);
  CHECK_THROWS_AS(mu_rate_audit(trace, floored), Error);
  const auto short_trace = schedule_trace(ScheduleParams{}, 20);
  CHECK_THROWS_AS(mu_rate_audit(short_trace, ScheduleParams{}), Error);
}

TEST_CASE("rate audit flags a tampered trace with the first index") {
  auto trace = schedule_trace(ScheduleParams{}, 200);
  for (std::size_t i = 120; i < trace.size(); ++i) trace[i].log_mu += 0.7;  // mu jumps up at index 120
  const RateAudit a = mu_rate_audit(trace, ScheduleParams{});
  CHECK_FALSE(a.passed());
  CHECK_FALSE(a.margin_ok);
  CHECK(a.first_margin_violation == 119);
  try {
    a.require();
    FAIL("expected AuditError");
  } catch (const AuditError& e) {
    CHECK(e.index() == 119);
  }
}

TEST_CASE("rate audit holds for 25 seeded (a, b) pairs") {
  Rng rng(17);
  for (int t = 0; t < 25; ++t) {
    ScheduleParams p;
    p.a = 1.1 + 4.0 * rng.uniform();
    p.b = 0.1 + 4.0 * rng.uniform();
    p.mu0 = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    CAPTURE(p.a);
    CAPTURE(p.b);
    const auto trace = schedule_trace(p, 5000);
    const RateAudit a = mu_rate_audit(trace, p);
    CHECK(a.exp_bound_ok);
    CHECK(a.margin_ok);
    CHECK(a.limit_ok);
    CHECK(a.decay_ok);
  }
}

TEST_CASE("floor: mu_k >= c always and mu_k = c after the crossing") {
  Rng rng(19);
  for (int t = 0; t < 25; ++t) {
    ScheduleParams p;
    p.a = 1.1 + 4.0 * rng.uniform();
    p.b = 0.1 + 4.0 * rng.uniform();
    p.c = std::pow(10.0, -8.0 + 6.0 * rng.uniform());
    p.mu0 = 1.0;
    const auto trace = schedule_trace(p, 3000);
    bool crossed = false, ok = true;
    for (std::size_t k = 1; k < trace.size(); ++k) {
      ok = ok && trace[k].mu >= p.c;
      if (crossed) ok = ok && trace[k].mu == p.c;
      crossed = crossed || trace[k].mu == p.c;
    }
    CHECK(crossed);
    CHECK(ok);
  }
}

}  // TEST_SUITE
