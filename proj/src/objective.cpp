#include "nsopt/objective.hpp"

#include <cmath>

#include "nsopt/error.hpp"

namespace nsopt {

double Objective::stepsize(double mu) const {
  const Curvature c = curvature();
  if (c.smoothed == 0.0) {
    if (c.exact == 0.0) throw Error(ErrorCode::InvalidArgument, "objective has zero curvature");
    return 1.0 / c.exact;
  }
  return mu / (c.smoothed + mu * c.exact);
}

double Objective::map_norm() const { return std::sqrt(curvature().smoothed); }

CompositeObjective::CompositeObjective(std::size_t n, std::optional<QuadraticPart> quadratic,
                                       std::optional<ResidualPart> residual, ProxTerm h)
    : n_(n), quadratic_(std::move(quadratic)), residual_(std::move(residual)), h_(std::move(h)) {
  if (n_ == 0) throw Error(ErrorCode::InvalidArgument, "objective dimension must be >= 1");
  h_.validate(n_);
  if (quadratic_) {
    const auto& qp = *quadratic_;
    if (qp.p.rows() != n_ || qp.p.cols() != n_ || qp.q.size() != n_) {
      throw Error(ErrorCode::DimensionMismatch, "quadratic part does not match dimension " + std::to_string(n_));
    }
    require_finite(qp.p, "quadratic P");
    require_finite(qp.q, "quadratic q");
    curvature_.exact = std::max(0.0, sym_eig(qp.p).values[0]);
  }
  if (residual_) {
    const auto& rp = *residual_;
    if (rp.a.cols() != n_ || rp.a.rows() != rp.b.size()) {
      throw Error(ErrorCode::DimensionMismatch, "residual map does not match dimension " + std::to_string(n_));
    }
    if (!(rp.weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "residual weight must be >= 0");
    require_finite(rp.a, "residual map");
    require_finite(rp.b, "residual offset");
    if (rp.weight > 0.0) curvature_.smoothed = spectral_norm_sq(rp.a);
  }
  // zero curvature is legal here (primal-dual splittings never need it);
  // stepsize() rejects it for the smoothing methods
}

double CompositeObjective::f(const Vector& x) const {
  double v = 0.0;
  if (quadratic_) {
    const Vector px = quadratic_->p * x;
    v += 0.5 * dot(x, px) + dot(quadratic_->q, x) + quadratic_->r;
  }
  if (residual_ && residual_->weight > 0.0) {
    const Vector r = residual_->a * x - residual_->b;
    v += residual_->weight * (residual_->norm == ResidualNorm::L1 ? norm1(r) : norm(r));
  }
  return v;
}

ValueGrad CompositeObjective::f_smoothed(const Vector& x, double mu) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "point does not match objective dimension");
  ValueGrad out{0.0, Vector(n_)};
  if (quadratic_) {
    Vector px = quadratic_->p * x;
    out.value = 0.5 * dot(x, px) + dot(quadratic_->q, x) + quadratic_->r;
    px += quadratic_->q;
    out.grad = std::move(px);
  }
  if (residual_ && residual_->weight > 0.0) {
    const SmoothedNorm s = smoothed_norm(residual_->a * x - residual_->b, mu, residual_->norm, residual_->weight);
    out.value += s.value;
    out.grad += multiply_transposed(residual_->a, s.dual);
  }
  return out;
}

Vector CompositeObjective::f_subgradient(const Vector& x) const {
  Vector g(n_);
  if (quadratic_) g = quadratic_->p * x + quadratic_->q;
  if (residual_ && residual_->weight > 0.0) {
    const SmoothedNorm s = smoothed_norm(residual_->a * x - residual_->b, 0.0, residual_->norm, residual_->weight);
    g += multiply_transposed(residual_->a, s.dual);
  }
  return g;
}

double CompositeObjective::lipschitz_sq() const {
  if (!residual_ || residual_->weight == 0.0) return 0.0;
  const double w2 = residual_->weight * residual_->weight;
  return residual_->norm == ResidualNorm::L1 ? w2 * static_cast<double>(residual_->a.rows()) : w2;
}

std::optional<LinearSplit> CompositeObjective::linear_split() const {
  if (quadratic_ || !residual_) return std::nullopt;
  return LinearSplit{&residual_->a, &residual_->b, residual_->weight, residual_->norm};
}

std::string CompositeObjective::split_obstacle() const {
  if (quadratic_ && residual_) return "multiple nonsmooth terms";
  return "no linear splitting";
}

// ---------------------------------------------------------------- spectral

SpectralObjective::SpectralObjective(Matrix c, ProxTerm h) : c_(std::move(c)), h_(std::move(h)) {
  if (c_.rows() < 2 || c_.rows() != c_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "spectral objective needs a square matrix with n >= 2");
  }
  require_finite(c_, "spectral cost matrix");
  if (c_.max_asymmetry() > kSymmetryTolerance) throw Error(ErrorCode::NonSymmetric, "spectral cost matrix");
  h_.validate(c_.rows());
}

Matrix SpectralObjective::shifted(const Vector& y) const {
  if (y.size() != c_.rows()) throw Error(ErrorCode::DimensionMismatch, "point does not match objective dimension");
  Matrix x = c_;
  for (std::size_t i = 0; i < y.size(); ++i) x(i, i) += y[i];
  return x;
}

SpectralMax SpectralObjective::spectral(const Vector& y, double mu) const {
  return spectral_max_value_grad(shifted(y), mu);
}

double SpectralObjective::f(const Vector& y) const {
  double sum = 0.0;
  for (double v : y) sum += v;
  return sym_eig(shifted(y)).values[0] - sum;
}

ValueGrad SpectralObjective::f_smoothed(const Vector& y, double mu) const {
  const SpectralMax s = spectral(y, mu);
  ValueGrad out{s.value - mu * std::log(static_cast<double>(y.size())), s.grad.diag()};
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.value -= y[i];
    out.grad[i] -= 1.0;
  }
  return out;
}

Vector SpectralObjective::f_subgradient(const Vector& y) const {
  const SymEig eig = sym_eig(shifted(y));
  Vector g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = eig.vectors(i, 0) * eig.vectors(i, 0) - 1.0;
  return g;
}

double SpectralObjective::lipschitz_sq() const { return 2.0 * std::log(static_cast<double>(c_.rows())); }

}  // namespace nsopt
