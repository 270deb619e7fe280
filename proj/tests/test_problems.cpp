#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nsopt/error.hpp"
#include "nsopt/problems.hpp"
#include "nsopt/solvers.hpp"
#include "oracles.hpp"

using namespace nsopt;

namespace {

double column_correlation(const Matrix& b, std::size_t j, std::size_t k) {
  const std::size_t m = b.rows();
  double mj = 0.0, mk = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mj += b(i, j);
    mk += b(i, k);
  }
  mj /= double(m);
  mk /= double(m);
  double sjk = 0.0, sjj = 0.0, skk = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sjk += (b(i, j) - mj) * (b(i, k) - mk);
    sjj += (b(i, j) - mj) * (b(i, j) - mj);
    skk += (b(i, k) - mk) * (b(i, k) - mk);
  }
  return sjk / std::sqrt(sjj * skk);
}

LibsvmData parse_text(const std::string& text, bool lenient = false) {
  std::istringstream in(text);
  return parse_libsvm(in, lenient);
}

std::size_t parse_error_line(const std::string& text, bool lenient = false) {
  try {
    parse_text(text, lenient);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("generators are deterministic in the seed") {
  LassoOptions o;
  o.n = 2;
  o.m = 2;
  CHECK(gen_lasso(o) == gen_lasso(o));
  LassoOptions other = o;
  other.seed = 43;
  CHECK_FALSE(gen_lasso(o) == gen_lasso(other));
  CHECK(gen_maxcut(6, 3, MaxCutReg::L1, 1.0) == gen_maxcut(6, 3, MaxCutReg::L1, 1.0));
  FaultDiagOptions f;
  CHECK(gen_fault_diag(f) == gen_fault_diag(f));
}

TEST_CASE("lasso instance structure") {
  LassoOptions o;
  o.n = 7;
  o.m = 5;
  const ProblemInstance inst = gen_lasso(o);
  CHECK(inst.matrix("B").rows() == 5);
  CHECK(inst.matrix("B").cols() == 7);
  CHECK(inst.weight("eta") == 1.0);
  CHECK(inst.curvature == doctest::Approx(op_norm_sq(inst.matrix("B"), 500)).epsilon(1e-6));
  CHECK(inst.lipschitz_sq == 5.0);
  o.norm = ResidualNorm::L2;
  CHECK(gen_lasso(o).lipschitz_sq == 1.0);
  CHECK_NOTHROW(validate(inst));
  o.n = 0;
  CHECK_THROWS_AS(gen_lasso(o), Error);
}

TEST_CASE("correlated columns") {
  LassoOptions o;
  o.n = 100;
  o.m = 100;
  o.correlated = true;
  const Matrix b = gen_lasso(o).matrix("B");
  double mean = 0.0;
  for (std::size_t j = 0; j + 1 < 100; ++j) mean += column_correlation(b, j, j + 1);
  mean /= 99.0;
  CHECK(mean > 0.3);
  o.correlated = false;
  const Matrix u = gen_lasso(o).matrix("B");
  double plain = 0.0;
  for (std::size_t j = 0; j + 1 < 100; ++j) plain += column_correlation(u, j, j + 1);
  CHECK(std::abs(plain / 99.0) < 0.1);
}

TEST_CASE("noise-free lasso fits its natural solution") {
  LassoOptions o;
  o.n = 6;
  o.m = 9;
  o.noise_std = 0.0;
  const ProblemInstance inst = gen_lasso(o);
  const Vector r = inst.matrix("B") * inst.vector("x_natural") - inst.vector("b");
  CHECK(norm(r) == 0.0);
}

TEST_CASE("maxcut construction") {
  const ProblemInstance inst = gen_maxcut(12, 5, MaxCutReg::L1, 0.5);
  const Matrix& c = inst.matrix("C");
  const SymEig e = sym_eig(c);
  CHECK(e.values[11] >= -1e-12);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-9));
  double tr = 0.0;
  for (std::size_t i = 0; i < 12; ++i) tr += c(i, i);
  CHECK(tr >= 1.0);
  CHECK(inst.lipschitz_sq == doctest::Approx(2.0 * std::log(12.0)));
  CHECK(inst.curvature == 1.0);
  CHECK_THROWS_AS(gen_maxcut(1, 5, MaxCutReg::L1, 0.5), Error);
  CHECK_THROWS_AS(gen_maxcut(4, 5, MaxCutReg::L1, -0.5), Error);

  const SpectralObjective hand(0.5 * Matrix::identity(2), ProxTerm::l1(1.0));
  CHECK(hand.value(Vector{0.0, 0.0}) == doctest::Approx(0.5));
}

TEST_CASE("fault diagnosis structure") {
  FaultDiagOptions o;
  o.length = 40;
  o.lag = 12;
  const ProblemInstance inst = gen_fault_diag(o);
  const Matrix& h = inst.matrix("H");
  // constant diagonals
  bool toeplitz = true;
  for (std::size_t i = 1; i < h.rows(); ++i)
    for (std::size_t j = 1; j < h.cols(); ++j) toeplitz = toeplitz && h(i, j) == h(i - 1, j - 1);
  CHECK(toeplitz);
  // the two selectors partition the coordinates
  std::vector<int> seen(inst.dim(), 0);
  for (std::size_t i : inst.indices.at("low_rank")) seen.at(i)++;
  for (std::size_t i : inst.indices.at("sparse")) seen.at(i)++;
  for (int s : seen) CHECK(s == 1);
  // at x = 0: F = 0.5 ||y||^2 and the smooth gradient is -H'y
  const auto obj = make_objective(inst);
  const Vector zero(inst.dim());
  const Vector& y = inst.vector("y");
  CHECK(obj->value(zero) == doctest::Approx(0.5 * dot(y, y)));
  const Vector g = obj->f_smoothed(zero, 0.3).grad;
  CHECK(distance(g, -1.0 * multiply_transposed(h, y)) <= 1e-12 * std::max(1.0, norm(g)));
  o.lag = o.length;
  CHECK_THROWS_AS(gen_fault_diag(o), Error);
}

TEST_CASE("mpc condensation matches the rollout at 100 inputs") {
  MpcOptions o;
  o.horizon = 8;
  o.x0 = Vector{1.0, -0.5};
  o.x_ref = Vector{0.3, 0.1};
  const ProblemInstance inst = gen_mpc(o);
  const Matrix& p = inst.matrix("P");
  const Vector& q = inst.vector("q");
  const double r = inst.params.at("r");
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const Vector u = gaussian_vector(rng, inst.dim());
    const double condensed = 0.5 * dot(u, p * u) + dot(q, u) + r;
    const double rollout =
        oracle::mpc_rollout_cost(inst.matrix("A"), inst.matrix("B"), inst.matrix("Q"), o.x0, o.x_ref, u);
    CHECK(std::abs(condensed - rollout) <= 1e-8 * std::abs(rollout));
  }
  CHECK(sym_eig(p).values[inst.dim() - 1] >= -1e-10);
}

TEST_CASE("mpc difference map") {
  MpcOptions o;
  o.horizon = 4;
  o.u_prev = Vector{0.5};
  const ProblemInstance inst = gen_mpc(o);
  const Vector u{1.0, 3.0, 2.0, 2.0};
  const Vector du = inst.matrix("D") * u - inst.vector("d0");
  CHECK(du == Vector{0.5, 2.0, -1.0, 0.0});
}

TEST_CASE("mpc at rest is optimal at zero input") {
  MpcOptions o;
  o.horizon = 6;
  o.x0 = Vector{0.0, 0.0};
  const ProblemInstance inst = gen_mpc(o);
  CHECK(norm(inst.vector("q")) == 0.0);
  const auto obj = make_objective(inst);
  const Vector zero(inst.dim());
  const Vector g = obj->f_subgradient(zero);
  CHECK(norm(g) == 0.0);
  CHECK(obj->value(zero) == 0.0);
}

TEST_CASE("mpc with one step and a scalar system matches a grid search") {
  MpcOptions o;
  o.a = Matrix{{0.9}};
  o.b = Matrix{{0.5}};
  o.q = Matrix{{1.0}};
  o.horizon = 1;
  o.x0 = Vector{1.0};
  o.x_ref = Vector{0.2};
  o.u_prev = Vector{0.1};
  o.lambda = 0.3;
  const ProblemInstance inst = gen_mpc(o);
  const auto obj = make_objective(inst);
  const auto grid = oracle::grid_min(
      [&](double u) {
        const double x1 = 0.9 * 1.0 + 0.5 * u;
        return (1.0 - 0.2) * (1.0 - 0.2) + (x1 - 0.2) * (x1 - 0.2) + 0.3 * std::abs(u - 0.1);
      },
      -1.0, 1.0);
  const Reference ref = run_reference(*obj, 1e-8, Vector{0.0});
  CHECK(ref.x[0] == doctest::Approx(grid.arg).epsilon(1e-6));
  CHECK(std::abs(ref.value - grid.value) <= 1e-9);
}

TEST_CASE("mpc without penalty or bounds matches the linear solve") {
  MpcOptions o;
  o.horizon = 12;
  o.x0 = Vector{1.0, -0.5};
  o.x_ref = Vector{0.3, 0.1};
  o.lambda = 0.0;
  o.u_min = Vector{-std::numeric_limits<double>::infinity()};
  o.u_max = Vector{std::numeric_limits<double>::infinity()};
  const ProblemInstance inst = gen_mpc(o);
  const auto obj = make_objective(inst);
  const Vector want = oracle::solve_dense(inst.matrix("P"), -1.0 * inst.vector("q"));
  RunOptions ro;
  ro.iters = 20000;
  const SolverState st = run_alg1(*obj, ScheduleParams{}, Vector(inst.dim()), ro);
  CHECK(oracle::rel_error(st.y, want) <= 1e-8);
}

TEST_CASE("mpc input validation") {
  MpcOptions o;
  o.u_min = Vector{1.0};
  o.u_max = Vector{0.0};
  try {
    gen_mpc(o);
    FAIL("expected InvertedBounds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvertedBounds);
  }
  MpcOptions bad;
  bad.a = Matrix::identity(3);
  try {
    gen_mpc(bad);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("instance JSON round trip is bit-identical") {
  LassoOptions lo;
  lo.n = 5;
  lo.m = 4;
  FaultDiagOptions fo;
  fo.length = 30;
  fo.lag = 9;
  MpcOptions mo;
  mo.horizon = 5;
  for (const ProblemInstance& inst :
       {gen_lasso(lo), gen_maxcut(5, 2, MaxCutReg::SquaredL2, 0.2), gen_fault_diag(fo), gen_mpc(mo)}) {
    const ProblemInstance back = instance_from_json(to_json(inst));
    CHECK(back == inst);
    CHECK(to_json(back) == to_json(inst));
  }
}

TEST_CASE("instance files round trip and reject foreign JSON") {
  const std::string path = "problems_roundtrip.json";
  const ProblemInstance inst = gen_maxcut(4, 1, MaxCutReg::L1, 1.0);
  save_instance(inst, path);
  CHECK(load_instance(path) == inst);
  CHECK_THROWS_AS(instance_from_json("{\"format\": \"other\"}"), Error);
  CHECK_THROWS_AS(instance_from_json("not json"), Error);
  try {
    load_instance("does/not/exist.json");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
  std::remove(path.c_str());
}

TEST_CASE("validator rejects inconsistent instances") {
  LassoOptions lo;
  lo.n = 5;
  lo.m = 4;
  ProblemInstance inst = gen_lasso(lo);
  inst.vectors["b"] = Vector(3);
  CHECK_THROWS_AS(validate(inst), Error);
  inst = gen_lasso(lo);
  inst.weights["eta"] = -1.0;
  CHECK_THROWS_AS(validate(inst), Error);
  inst = gen_lasso(lo);
  inst.curvature *= 2.0;
  CHECK_THROWS_AS(validate(inst), Error);
}

TEST_CASE("initial point is seeded and feasible") {
  MpcOptions mo;
  mo.horizon = 10;
  const ProblemInstance inst = gen_mpc(mo);
  const Vector a = initial_point(inst, 3);
  CHECK(a == initial_point(inst, 3));
  CHECK_FALSE(a == initial_point(inst, 4));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] >= inst.vector("lo")[i]);
    CHECK(a[i] <= inst.vector("hi")[i]);
  }
}

TEST_CASE("libsvm examples") {
  const LibsvmData a = parse_text("1.5 1:2.0 3:-1.0\n");
  CHECK(a.targets == Vector{1.5});
  CHECK(a.features == Matrix{{2.0, 0.0, -1.0}});
  const LibsvmData b = parse_text("# comment\n0 1:1\n");
  CHECK(b.targets == Vector{0.0});
  CHECK(b.features == Matrix{{1.0}});
  CHECK(parse_error_line("x 1:1\n") == 1);
}

TEST_CASE("libsvm line numbers count comments and blank lines") {
  CHECK(parse_error_line("# a\n\n1 1:1\n\n2 2:x\n") == 5);
  CHECK(parse_error_line("1 2:1 1:1\n") == 1);
  CHECK(parse_error_line("1 2:1 1:1\n", true) == 0);
  CHECK(parse_error_line("1 2:1 2:1\n", true) == 1);
  CHECK(parse_error_line("") == 1);
}

TEST_CASE("libsvm fixtures") {
  const std::string dir = NSOPT_FIXTURE_DIR "/libsvm/";
  std::ifstream mf(dir + "manifest.json");
  REQUIRE(mf.good());
  const auto manifest = nlohmann::json::parse(mf);
  for (const auto& c : manifest.at("accept")) {
    const std::string file = c.at("file");
    CAPTURE(file);
    const LibsvmData d = load_libsvm(dir + file, c.value("lenient", false));
    const auto targets = c.at("targets").get<std::vector<double>>();
    const auto rows = c.at("features").get<std::vector<std::vector<double>>>();
    CHECK(d.targets == Vector(targets));
    REQUIRE(d.features.rows() == rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      REQUIRE(d.features.cols() == rows[r].size());
      for (std::size_t j = 0; j < rows[r].size(); ++j) CHECK(d.features(r, j) == rows[r][j]);
    }
  }
  for (const auto& c : manifest.at("reject")) {
    const std::string file = c.at("file");
    CAPTURE(file);
    try {
      load_libsvm(dir + file, c.value("lenient", false));
      FAIL("accepted a malformed fixture");
    } catch (const ParseError& e) {
      CHECK(e.line() == c.at("line").get<std::size_t>());
    }
  }
}

TEST_CASE("lasso from libsvm data") {
  const LibsvmData d = parse_text("1 1:1 2:2\n2 1:3\n0 2:1\n");
  const ProblemInstance inst = lasso_from_libsvm(d, "tiny", ResidualNorm::L1, 0.5);
  CHECK(inst.family == Family::LassoL1);
  CHECK(inst.lipschitz_sq == 3.0);
  CHECK(inst.weight("eta") == 0.5);
  CHECK_NOTHROW(validate(inst));
  const auto obj = make_objective(inst);
  const Vector x{1.0, -1.0};
  CHECK(obj->value(x) == doctest::Approx(std::abs(-1.0 - 1.0) + std::abs(3.0 - 2.0) + std::abs(-1.0) + 0.5 * 2.0));
}

TEST_CASE("family names round trip") {
  for (Family f : {Family::LassoL1, Family::LassoL2, Family::MaxCutDual, Family::FaultDiag, Family::L1Mpc}) {
    CHECK(family_from_string(to_string(f)) == f);
  }
  CHECK_THROWS_AS(family_from_string("portfolio"), Error);
}

}  // TEST_SUITE
