#include "nsopt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "nsopt/error.hpp"

namespace nsopt {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

// ---------------------------------------------------------------- Vector

Vector& Vector::operator+=(const Vector& other) {
  require_same_size(size(), other.size(), "vector +=");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_size(size(), other.size(), "vector -=");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

bool Vector::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vector operator+(Vector lhs, const Vector& rhs) { return lhs += rhs; }
Vector operator-(Vector lhs, const Vector& rhs) { return lhs -= rhs; }
Vector operator-(Vector v) { return v *= -1.0; }
Vector operator*(double s, Vector v) { return v *= s; }

double dot(const Vector& a, const Vector& b) {
  require_same_size(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const Vector& v) {
  // scaled accumulation keeps huge or tiny entries from over/underflowing
  double scale = norm_inf(v);
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double acc = 0.0;
  for (double x : v) {
    const double r = x / scale;
    acc += r * r;
  }
  return scale * std::sqrt(acc);
}

double norm1(const Vector& v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double distance(const Vector& a, const Vector& b) { return norm(a - b); }

void axpy(double a, const Vector& x, Vector& y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch, "matrix entry count " + std::to_string(data_.size()) +
                                                  " != " + std::to_string(rows_) + "x" +
                                                  std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_same_size(r.size(), cols_, "matrix row length");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

Vector Matrix::diag() const {
  const std::size_t k = std::min(rows_, cols_);
  Vector d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = (*this)(i, i);
  return d;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const { return norm(Vector(data_)); }

double Matrix::max_asymmetry() const {
  require_same_size(rows_, cols_, "symmetry check needs a square matrix");
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
  return worst;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_size(rows_, other.rows_, "matrix += rows");
  require_same_size(cols_, other.cols_, "matrix += cols");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_size(rows_, other.rows_, "matrix -= rows");
  require_same_size(cols_, other.cols_, "matrix -= cols");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_size(a.cols(), b.rows(), "matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* crow = c.data() + i * c.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data() + k * b.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  require_same_size(a.cols(), x.size(), "matrix-vector product");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.data() + i * a.cols();
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += arow[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vector multiply_transposed(const Matrix& a, const Vector& x) {
  require_same_size(a.rows(), x.size(), "transposed matrix-vector product");
  Vector y(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* arow = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += arow[j] * xi;
  }
  return y;
}

Matrix gram(const Matrix& a) {
  const std::size_t n = a.cols();
  Matrix g(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* row = a.data() + r * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      double* grow = g.data() + i * n;
      for (std::size_t j = i; j < n; ++j) grow[j] += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

void require_finite(const Vector& v, const char* what) {
  if (!v.all_finite()) throw Error(ErrorCode::NonFinite, std::string(what) + " has NaN/Inf entries");
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw Error(ErrorCode::NonFinite, std::string(what) + " has NaN/Inf entries");
}

// ---------------------------------------------------------------- eigen / svd

SymEig sym_eig(const Matrix& input) {
  require_finite(input, "sym_eig input");
  if (input.rows() != input.cols() || input.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "sym_eig needs a nonempty square matrix");
  }
  const double asym = input.max_asymmetry();
  if (asym > kSymmetryTolerance) {
    throw Error(ErrorCode::NonSymmetric, "max asymmetry " + std::to_string(asym));
  }

  const std::size_t n = input.rows();
  Matrix a = input;
  // symmetrize so rounding-level asymmetry cannot leak into the rotations
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  Matrix v = Matrix::identity(n);

  const double fro2 = [&] {
    const double f = a.frobenius_norm();
    return f * f;
  }();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * fro2 || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // rotation is negligible once a_pq is below the diagonal's ulp
        if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double nkp = c * akp - s * akq;
          const double nkq = s * akp + c * akq;
          a(k, p) = a(p, k) = nkp;
          a(k, q) = a(q, k) = nkq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEig out{Vector(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

namespace {

// Make the largest-magnitude entry of each column positive.
void fix_signs(Matrix& v, Matrix* partner) {
  for (std::size_t c = 0; c < v.cols(); ++c) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > std::abs(v(arg, c))) arg = r;
    if (v(arg, c) < 0.0) {
      for (std::size_t r = 0; r < v.rows(); ++r) v(r, c) = -v(r, c);
      if (partner != nullptr)
        for (std::size_t r = 0; r < partner->rows(); ++r) (*partner)(r, c) = -(*partner)(r, c);
    }
  }
}

// Modified Gram-Schmidt over the columns of u (two passes). Columns flagged as
// degenerate, or that collapse during orthogonalization, are replaced with the
// first standard basis vector that is not yet spanned.
void orthonormalize_columns(Matrix& u, std::vector<bool> degenerate) {
  const std::size_t m = u.rows();
  const std::size_t k = u.cols();
  std::size_t next_basis = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (int attempt = 0;; ++attempt) {
      if (degenerate[c]) {
        for (std::size_t r = 0; r < m; ++r) u(r, c) = (r == next_basis) ? 1.0 : 0.0;
        ++next_basis;
      }
      double before = 0.0;
      for (std::size_t r = 0; r < m; ++r) before += u(r, c) * u(r, c);
      before = std::sqrt(before);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < c; ++j) {
          double proj = 0.0;
          for (std::size_t r = 0; r < m; ++r) proj += u(r, j) * u(r, c);
          for (std::size_t r = 0; r < m; ++r) u(r, c) -= proj * u(r, j);
        }
      }
      double nrm = 0.0;
      for (std::size_t r = 0; r < m; ++r) nrm += u(r, c) * u(r, c);
      nrm = std::sqrt(nrm);
      if (nrm > 1e-8 * std::max(before, 1e-300) && nrm > 0.0) {
        for (std::size_t r = 0; r < m; ++r) u(r, c) /= nrm;
        break;
      }
      degenerate[c] = true;
      if (next_basis >= m || attempt > static_cast<int>(m)) {
        throw Error(ErrorCode::NonFinite, "could not complete orthonormal basis");
      }
    }
  }
}

Svd tall_svd(const Matrix& a) {
  // rows >= cols
  const std::size_t n = a.cols();
  SymEig eig = sym_eig(gram(a));
  Svd out{Matrix(a.rows(), n), Vector(n), Matrix(n, n)};
  fix_signs(eig.vectors, nullptr);
  // sigma_i = ||A v_i|| is accurate to eps ||A||; sqrt of the Gram eigenvalue
  // only to sqrt(eps) ||A||, which inflates zero singular values
  const Matrix av_unsorted = a * eig.vectors;
  std::vector<double> sigma(n);
  for (std::size_t c = 0; c < n; ++c) sigma[c] = norm(av_unsorted.column(c));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });
  Matrix av(a.rows(), n);
  for (std::size_t c = 0; c < n; ++c) {
    out.s[c] = sigma[order[c]];
    for (std::size_t r = 0; r < n; ++r) out.v(r, c) = eig.vectors(r, order[c]);
    for (std::size_t r = 0; r < a.rows(); ++r) av(r, c) = av_unsorted(r, order[c]);
  }

  const double smax = n > 0 ? out.s[0] : 0.0;
  const double cutoff = std::max(1e-300, smax * 1e-13 * static_cast<double>(std::max(a.rows(), n)));
  std::vector<bool> degenerate(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    if (out.s[c] <= cutoff) {
      degenerate[c] = true;
      continue;
    }
    for (std::size_t r = 0; r < a.rows(); ++r) out.u(r, c) = av(r, c) / out.s[c];
  }
  orthonormalize_columns(out.u, std::move(degenerate));
  return out;
}

}  // namespace

Svd thin_svd(const Matrix& a) {
  require_finite(a, "thin_svd input");
  if (a.rows() == 0 || a.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "thin_svd needs a nonempty matrix");
  }
  if (a.rows() >= a.cols()) return tall_svd(a);
  Svd t = tall_svd(a.transpose());
  return Svd{std::move(t.v), std::move(t.s), std::move(t.u)};
}

double op_norm_sq(const Matrix& a, int iters) {
  if (iters < 1) throw Error(ErrorCode::InvalidArgument, "op_norm_sq needs iters >= 1");
  require_finite(a, "op_norm_sq input");
  Rng rng(0x6f706e6f726dULL);
  Vector v = gaussian_vector(rng, a.cols());
  v *= 1.0 / norm(v);
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Vector av = a * v;
    const Vector w = multiply_transposed(a, av);
    estimate = std::max(estimate, dot(av, av));
    const double wn = norm(w);
    if (wn == 0.0) break;
    v = (1.0 / wn) * w;
  }
  return estimate;
}

double spectral_norm_sq(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  const Matrix g = a.rows() >= a.cols() ? gram(a) : gram(a.transpose());
  return std::max(0.0, sym_eig(g).values[0]);
}

// ---------------------------------------------------------------- rng

namespace {

std::uint64_t splitmix64(std::uint64_t& z) {
  z += 0x9E3779B97F4A7C15ULL;
  std::uint64_t r = z;
  r = (r ^ (r >> 30)) * 0xBF58476D1CE4E5B9ULL;
  r = (r ^ (r >> 27)) * 0x94D049BB133111EBULL;
  return r ^ (r >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t z = seed;
  for (auto& s : s_) s = splitmix64(z);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * kTwoPow53Inv; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * kTwoPow53Inv;
  const double u2 = static_cast<double>(next_u64() >> 11) * kTwoPow53Inv;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::InvalidArgument, "gaussian needs rows, cols >= 1");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Vector gaussian_vector(Rng& rng, std::size_t n) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace nsopt
