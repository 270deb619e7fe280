#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace nsopt {

// Dense real vector. Operations that consume vectors reject NaN/Inf.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  std::span<const double> view() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s);

  bool all_finite() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector lhs, const Vector& rhs);
Vector operator-(Vector lhs, const Vector& rhs);
Vector operator-(Vector v);
Vector operator*(double s, Vector v);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
double norm1(const Vector& v);
double norm_inf(const Vector& v);
double distance(const Vector& a, const Vector& b);
// y += a * x
void axpy(double a, const Vector& x, Vector& y);

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  const std::vector<double>& values() const noexcept { return data_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Vector column(std::size_t j) const;
  Vector diag() const;

  Matrix transpose() const;
  double frobenius_norm() const;
  // max |a_ij - a_ji|; requires a square matrix
  double max_asymmetry() const;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(double s, Matrix m);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);
// A^T x without forming the transpose
Vector multiply_transposed(const Matrix& a, const Vector& x);
// A^T A
Matrix gram(const Matrix& a);

void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);

inline constexpr double kSymmetryTolerance = 1e-10;

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, column i pairs with values[i]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEig sym_eig(const Matrix& a);

struct Svd {
  Matrix u;  // m x k
  Vector s;  // k = min(m, n), descending, nonnegative
  Matrix v;  // n x k
};

// Thin SVD through the eigendecomposition of the smaller Gram matrix.
Svd thin_svd(const Matrix& a);

// Power-iteration estimate of ||A||_2^2 = lambda_max(A^T A).
double op_norm_sq(const Matrix& a, int iters);

// Exact ||A||_2^2 from the Gram eigendecomposition.
double spectral_norm_sq(const Matrix& a);

/// Portable seeded generator: xoshiro256** (Blackman & Vigna) whose 256-bit
/// state is filled from the 64-bit seed with four splitmix64 steps.
///
///   splitmix64: z += 0x9E3779B97F4A7C15;
///               z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///               z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
///               return z ^ (z >> 31);
///   xoshiro256**: result = rotl(s1 * 5, 7) * 9; t = s1 << 17;
///               s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45);
///
/// uniform() maps the top 53 bits to [0, 1). normal() is Box-Muller:
/// u1 = (top53 + 1) * 2^-53 in (0, 1], u2 = top53 * 2^-53,
/// r = sqrt(-2 ln u1), returning r cos(2 pi u2) then r sin(2 pi u2).
/// Only IEEE-754 arithmetic and libm log/sqrt/cos/sin are involved.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64();
  double uniform();
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// rows x cols matrix of i.i.d. N(0, 1) draws, filled in row-major order.
Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols);
Vector gaussian_vector(Rng& rng, std::size_t n);

}  // namespace nsopt
