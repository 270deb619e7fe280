#include <cmath>

#include "doctest.h"
#include "nsopt/error.hpp"
#include "nsopt/numerics.hpp"
#include "oracles.hpp"

using namespace nsopt;

namespace {

double fro(const Matrix& m) { return m.frobenius_norm(); }

Matrix random_symmetric(Rng& rng, std::size_t n) {
  const Matrix g = gaussian(rng, n, n);
  return 0.5 * (g + g.transpose());
}

void check_eig(const Matrix& a, const SymEig& e) {
  const std::size_t n = a.rows();
  const Matrix lam = Matrix::diagonal(e.values);
  const double scale = std::max(1.0, fro(a));
  CHECK(fro(a * e.vectors - e.vectors * lam) <= 1e-9 * scale);
  CHECK(fro(e.vectors.transpose() * e.vectors - Matrix::identity(n)) <= 1e-9);
  for (std::size_t i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("vector and matrix arithmetic") {
  const Vector a{1.0, 2.0, 3.0};
  const Vector b{4.0, -5.0, 6.0};
  CHECK(dot(a, b) == doctest::Approx(12.0));
  CHECK(norm1(b) == 15.0);
  CHECK(norm_inf(b) == 6.0);
  CHECK(norm(Vector{3.0, 4.0}) == 5.0);
  CHECK((a + b) == Vector{5.0, -3.0, 9.0});
  CHECK((2.0 * a) == Vector{2.0, 4.0, 6.0});
  const Matrix m{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  CHECK((m * Vector{1.0, 1.0}) == Vector{3.0, 7.0, 11.0});
  CHECK(multiply_transposed(m, Vector{1.0, 0.0, 1.0}) == Vector{6.0, 8.0});
  CHECK(gram(m) == m.transpose() * m);
  CHECK_THROWS_AS(dot(a, Vector{1.0}), Error);
}

TEST_CASE("matrix construction rejects inconsistent data") {
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS((Matrix{{1.0, 2.0}, {3.0}}), Error);
}

TEST_CASE("sym_eig of diag(2, 1)") {
  const SymEig e = sym_eig(Matrix{{2.0, 0.0}, {0.0, 1.0}});
  CHECK(e.values[0] == 2.0);
  CHECK(e.values[1] == 1.0);
  CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig of the swap matrix") {
  const SymEig e = sym_eig(Matrix{{0.0, 1.0}, {1.0, 0.0}});
  CHECK(e.values[0] == doctest::Approx(1.0));
  CHECK(e.values[1] == doctest::Approx(-1.0));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(r));
  CHECK(e.vectors(0, 0) * e.vectors(1, 0) == doctest::Approx(0.5));
  CHECK(e.vectors(0, 1) * e.vectors(1, 1) == doctest::Approx(-0.5));
}

TEST_CASE("sym_eig random 8x8 seed 7") {
  Rng rng(7);
  const Matrix a = random_symmetric(rng, 8);
  check_eig(a, sym_eig(a));
}

TEST_CASE("sym_eig residuals on 100 random symmetric matrices up to 50x50") {
  Rng rng(2024);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 50.0);
    const Matrix a = random_symmetric(rng, n);
    check_eig(a, sym_eig(a));
  }
}

TEST_CASE("sym_eig errors") {
  CHECK_THROWS_WITH_AS(sym_eig(Matrix{{0.0, 1.0}, {1.0 + 1e-8, 0.0}}), doctest::Contains("NonSymmetric"), Error);
  CHECK_THROWS_AS(sym_eig(Matrix{{NAN, 0.0}, {0.0, 1.0}}), Error);
  try {
    sym_eig(Matrix{{INFINITY}});
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}

TEST_CASE("thin_svd examples") {
  const Svd d = thin_svd(Matrix{{3.0, 0.0}, {0.0, 1.0}});
  CHECK(d.s[0] == doctest::Approx(3.0));
  CHECK(d.s[1] == doctest::Approx(1.0));
  const Svd z = thin_svd(Matrix(2, 3));
  CHECK(z.s.size() == 2);
  CHECK(z.s[0] == 0.0);
  CHECK(z.s[1] == 0.0);

  Rng rng(3);
  const Matrix a = gaussian(rng, 5, 3);
  const Svd s = thin_svd(a);
  const SymEig e = sym_eig(gram(a));
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(s.s[i] - std::sqrt(e.values[i])) <= 1e-8 * s.s[0]);
  CHECK(fro(s.u * Matrix::diagonal(s.s) * s.v.transpose() - a) <= 1e-9 * std::max(1.0, fro(a)));
  CHECK(fro(s.u.transpose() * s.u - Matrix::identity(3)) <= 1e-9);
  CHECK(fro(s.v.transpose() * s.v - Matrix::identity(3)) <= 1e-9);
}

TEST_CASE("thin_svd property: wide, tall and rank-deficient inputs") {
  Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 9.0);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 9.0);
    Matrix a = gaussian(rng, m, n);
    if (t % 3 == 0 && m > 1) {
      for (std::size_t j = 0; j < n; ++j) a(m - 1, j) = a(0, j);  // repeat a row
    }
    const Svd s = thin_svd(a);
    const std::size_t k = std::min(m, n);
    REQUIRE(s.s.size() == k);
    CHECK(fro(s.u * Matrix::diagonal(s.s) * s.v.transpose() - a) <= 1e-9 * std::max(1.0, fro(a)));
    CHECK(fro(s.u.transpose() * s.u - Matrix::identity(k)) <= 1e-9);
    CHECK(fro(s.v.transpose() * s.v - Matrix::identity(k)) <= 1e-9);
    const SymEig e = sym_eig(m <= n ? a * a.transpose() : gram(a));
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(std::abs(s.s[i] - std::sqrt(std::max(0.0, e.values[i]))) <= 1e-8 * std::max(1.0, s.s[0]));
    }
  }
}

TEST_CASE("op_norm_sq examples") {
  CHECK(op_norm_sq(Matrix::identity(3), 10) == doctest::Approx(1.0));
  CHECK(op_norm_sq(Matrix{{2.0, 0.0}, {0.0, 1.0}}, 200) == doctest::Approx(4.0).epsilon(1e-12));
  Rng rng(1);
  const Matrix a = gaussian(rng, 10, 10);
  const double want = sym_eig(gram(a)).values[0];
  CHECK(std::abs(op_norm_sq(a, 200) - want) <= 1e-6 * want);
  CHECK(std::abs(spectral_norm_sq(a) - want) <= 1e-12 * want);
  CHECK_THROWS_AS(op_norm_sq(a, 0), Error);
}

TEST_CASE("op_norm_sq is nondecreasing in the iteration count") {
  Rng rng(5);
  const Matrix a = gaussian(rng, 12, 7);
  double prev = 0.0;
  for (int it = 1; it <= 300; it += 7) {
    const double v = op_norm_sq(a, it);
    CHECK(v >= prev * (1.0 - 1e-14));
    prev = v;
  }
}

TEST_CASE("gaussian determinism and moments") {
  Rng r1(42), r2(42), r3(43);
  const Matrix a = gaussian(r1, 2, 2);
  CHECK(a == gaussian(r2, 2, 2));
  CHECK_FALSE(a == gaussian(r3, 2, 2));

  Rng r(42);
  const Matrix s = gaussian(r, 1000, 1);
  double mean = 0.0;
  for (double v : s.values()) mean += v;
  mean /= 1000.0;
  double var = 0.0;
  for (double v : s.values()) var += (v - mean) * (v - mean);
  var /= 999.0;
  CHECK(std::abs(mean) <= 0.1);
  CHECK(std::abs(var - 1.0) <= 0.1);
}

TEST_CASE("rng stream matches the documented xoshiro256** recurrence") {
  // independent re-implementation of the documented construction
  auto splitmix = [](std::uint64_t& z) {
    z += 0x9E3779B97F4A7C15ull;
    std::uint64_t x = z;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  };
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  std::uint64_t z = 42;
  std::uint64_t s[4];
  for (auto& w : s) w = splitmix(z);
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t want = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    REQUIRE(rng.next_u64() == want);
  }
}

TEST_CASE("rng uniform lies in [0, 1)") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

}  // TEST_SUITE
