#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "nsopt/driver.hpp"
#include "nsopt/error.hpp"

using namespace nsopt;

namespace {

ProblemInstance small_lasso() {
  LassoOptions o;
  o.n = 12;
  o.m = 12;
  o.seed = 9;
  return gen_lasso(o);
}

const std::string* find_meta(const Metadata& meta, const std::string& key) {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

}  // namespace

TEST_SUITE("driver") {

TEST_CASE("algorithm ids round trip") {
  for (Algorithm a : all_algorithms()) CHECK(algorithm_from_string(to_string(a)) == a);
  CHECK(all_algorithms().size() == 6);
  CHECK(display_name(Algorithm::TranDinh).find("stand-in") != std::string_view::npos);
  CHECK_THROWS_AS(algorithm_from_string("lbfgs"), Error);
}

TEST_CASE("run config validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.iters = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.checkpoints = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.schedule.c = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.rho = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("instance digest tracks content") {
  const ProblemInstance a = small_lasso();
  ProblemInstance b = a;
  CHECK(instance_digest(a) == instance_digest(b));
  CHECK(instance_digest(a).size() == 16);
  b.weights["eta"] = 2.0;
  CHECK(instance_digest(a) != instance_digest(b));
  CHECK(reference_cache_path("dir/p.json") == "dir/p.ref.json");
  CHECK(reference_cache_path("p") == "p.ref.json");
}

TEST_CASE("reference cache round trip and invalidation") {
  const ProblemInstance inst = small_lasso();
  const auto obj = make_objective(inst);
  const ReferenceInfo ref = compute_reference(inst, *obj, 1e-6);
  CHECK(ref.certified);
  CHECK(ref.source == "computed");
  const std::string path = "driver_cache.ref.json";
  const std::string digest = instance_digest(inst);
  save_reference(path, ref, digest);

  const auto back = load_reference(path, digest, 1e-6);
  REQUIRE(back.has_value());
  CHECK(back->value == ref.value);
  CHECK(back->x == ref.x);
  CHECK(back->source == "cache");
  CHECK_FALSE(load_reference(path, "0000000000000000", 1e-6).has_value());
  CHECK_FALSE(load_reference(path, digest, 1e-9).has_value());  // tighter target than certified
  CHECK(load_reference(path, digest, 1e-3).has_value());
  CHECK_FALSE(load_reference("missing.ref.json", digest, 1e-6).has_value());

  std::vector<std::string> warnings;
  const ReferenceInfo cached = cached_reference(inst, *obj, 1e-6, path, warnings);
  CHECK(cached.source == "cache");
  CHECK(warnings.empty());
  std::remove(path.c_str());
}

TEST_CASE("run metadata records the resolved configuration") {
  const ProblemInstance inst = small_lasso();
  const auto obj = make_objective(inst);
  const ReferenceInfo ref = compute_reference(inst, *obj, 1e-6);
  RunConfig cfg;
  cfg.iters = 50;
  std::vector<std::string> warnings;
  const RunResult r = run_configured(inst, *obj, cfg, ref, warnings);
  CHECK(r.trace.size() == 50);
  CHECK(warnings.empty());
  for (const char* key : {"algorithm", "iters", "seed", "mu0", "mu0_source", "mu1", "a", "b", "c", "beta0",
                          "reference_value", "instance_digest"}) {
    CAPTURE(key);
    CHECK(find_meta(r.meta, key) != nullptr);
  }
  CHECK(find_meta(r.meta, "mu0_source")->rfind("auto: ", 0) == 0);
  CHECK(r.initial_gap == doctest::Approx(relative_gap(obj->value(initial_point(inst, 42)), ref.value)));
}

TEST_CASE("auto mu0 without a reference falls back to 1 with a warning") {
  const ProblemInstance inst = small_lasso();
  const auto obj = make_objective(inst);
  RunConfig cfg;
  cfg.iters = 5;
  std::vector<std::string> warnings;
  const RunResult r = run_configured(inst, *obj, cfg, std::nullopt, warnings);
  CHECK(*find_meta(r.meta, "mu0") == "1");
  CHECK_FALSE(warnings.empty());
  CHECK(std::isnan(r.trace.back().gap));
}

TEST_CASE("ADMM without a penalty runs the sweep") {
  const ProblemInstance inst = small_lasso();
  const auto obj = make_objective(inst);
  const ReferenceInfo ref = compute_reference(inst, *obj, 1e-6);
  RunConfig cfg;
  cfg.algorithm = Algorithm::Admm;
  cfg.iters = 100;
  std::vector<std::string> warnings;
  const RunResult r = run_configured(inst, *obj, cfg, ref, warnings);
  CHECK(r.note.rfind("best rho ", 0) == 0);
  CHECK(r.trace.size() == 100);
}

TEST_CASE("bench suites") {
  CHECK(bench_instance("lasso-l1", 42).dim() == 100);
  CHECK(bench_instance("lasso-l2", 42).family == Family::LassoL2);
  CHECK(bench_instance("maxcut", 42).dim() == 50);
  CHECK(bench_instance("mpc", 42, 7).params.at("horizon") == 7.0);
  CHECK(bench_instance("fault-diag", 42).family == Family::FaultDiag);
  CHECK_THROWS_AS(bench_instance("nope", 42), Error);

  const std::string path = "driver_bench.libsvm";
  {
    std::ofstream f(path);
    f << "1 1:1 2:0.5\n0 1:-1 3:2\n2 2:1 3:1\n";
  }
  const ProblemInstance from_file = bench_instance("libsvm:" + path, 1);
  CHECK(from_file.dim() == 3);
  std::remove(path.c_str());
}

TEST_CASE("bench records unsupported runs per algorithm") {
  const ProblemInstance inst = bench_instance("mpc", 42, 5);
  const auto obj = make_objective(inst);
  const ReferenceInfo ref = compute_reference(inst, *obj, 1e-6);
  BenchOptions opts;
  opts.base.iters = 40;
  opts.threads = 3;
  std::vector<RunResult> results;
  const auto runs = run_bench(inst, *obj, ref, opts, results);
  REQUIRE(runs.size() == 6);
  for (const auto& run : runs) {
    CAPTURE(run.algorithm);
    if (run.algorithm == "cp" || run.algorithm == "admm") {
      CHECK_FALSE(run.ok);
      CHECK(run.error.rfind("unsupported: ", 0) == 0);
    } else {
      CHECK(run.ok);
      CHECK(run.trace.size() == 40);
    }
  }
}

TEST_CASE("bench results do not depend on the thread count") {
  const ProblemInstance inst = small_lasso();
  const auto obj = make_objective(inst);
  const ReferenceInfo ref = compute_reference(inst, *obj, 1e-6);
  BenchOptions one;
  one.base.iters = 60;
  one.threads = 1;
  BenchOptions many = one;
  many.threads = 4;
  std::vector<RunResult> r1, r4;
  const auto a = run_bench(inst, *obj, ref, one, r1);
  const auto b = run_bench(inst, *obj, ref, many, r4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].algorithm == b[i].algorithm);
    REQUIRE(a[i].trace.size() == b[i].trace.size());
    for (std::size_t k = 0; k < a[i].trace.size(); ++k) CHECK(a[i].trace[k].objective == b[i].trace[k].objective);
  }
}

}  // TEST_SUITE
