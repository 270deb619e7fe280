#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "nsopt/numerics.hpp"
#include "nsopt/prox.hpp"
#include "nsopt/smoothing.hpp"

namespace nsopt {

// grad f_mu is (smoothed / mu + exact)-Lipschitz.
struct Curvature {
  double smoothed = 0.0;  // squared norm of the map inside the smoothed term
  double exact = 0.0;     // curvature of the part that is kept unsmoothed
};

// F(x) = weight * ||K x - d||_p + h(x): the shape primal-dual splittings need.
struct LinearSplit {
  const Matrix* k = nullptr;
  const Vector* d = nullptr;
  double weight = 1.0;
  ResidualNorm norm = ResidualNorm::L1;
};

// F = f + h with f possibly nonsmooth (smoothed at mu) and h prox-friendly.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual double f(const Vector& x) const = 0;
  // f_mu and its gradient; f_mu <= f <= f_mu + mu * lipschitz_sq() / 2
  virtual ValueGrad f_smoothed(const Vector& x, double mu) const = 0;
  virtual Vector f_subgradient(const Vector& x) const = 0;
  virtual const ProxTerm& h() const = 0;
  virtual Curvature curvature() const = 0;
  virtual double lipschitz_sq() const = 0;
  virtual std::optional<LinearSplit> linear_split() const { return std::nullopt; }
  // Reason the problem has no linear split, for error messages.
  virtual std::string split_obstacle() const { return "no linear splitting"; }

  double value(const Vector& x) const { return f(x) + h().value(x); }
  double smoothed_value(const Vector& x, double mu) const { return f_smoothed(x, mu).value + h().value(x); }
  // 1 / Lipschitz(grad f_mu) = mu / (smoothed + mu * exact)
  double stepsize(double mu) const;
  // Square root of the smoothed-map curvature (operator norm of the inner map).
  double map_norm() const;
};

struct QuadraticPart {
  Matrix p;  // symmetric PSD
  Vector q;
  double r = 0.0;
};

struct ResidualPart {
  Matrix a;
  Vector b;
  double weight = 1.0;
  ResidualNorm norm = ResidualNorm::L1;
};

// 0.5 x'Px + q'x + r  +  w ||A x - b||_p  +  h(x), any of the first two optional.
class CompositeObjective final : public Objective {
 public:
  CompositeObjective(std::size_t n, std::optional<QuadraticPart> quadratic,
                     std::optional<ResidualPart> residual, ProxTerm h);

  std::size_t dim() const override { return n_; }
  double f(const Vector& x) const override;
  ValueGrad f_smoothed(const Vector& x, double mu) const override;
  Vector f_subgradient(const Vector& x) const override;
  const ProxTerm& h() const override { return h_; }
  Curvature curvature() const override { return curvature_; }
  double lipschitz_sq() const override;
  std::optional<LinearSplit> linear_split() const override;
  std::string split_obstacle() const override;

  const std::optional<QuadraticPart>& quadratic() const { return quadratic_; }
  const std::optional<ResidualPart>& residual() const { return residual_; }

 private:
  std::size_t n_;
  std::optional<QuadraticPart> quadratic_;
  std::optional<ResidualPart> residual_;
  ProxTerm h_;
  Curvature curvature_;
};

// lambda_max(C + diag(y)) - <1, y> + h(y). The smoothed part is the shifted
// log-sum-exp mu log sum exp(lambda_i / mu) - mu log n, a lower model of lambda_max.
class SpectralObjective final : public Objective {
 public:
  SpectralObjective(Matrix c, ProxTerm h);

  std::size_t dim() const override { return c_.rows(); }
  double f(const Vector& y) const override;
  ValueGrad f_smoothed(const Vector& y, double mu) const override;
  Vector f_subgradient(const Vector& y) const override;
  const ProxTerm& h() const override { return h_; }
  Curvature curvature() const override { return {1.0, 0.0}; }
  double lipschitz_sq() const override;
  std::string split_obstacle() const override { return "spectral objective has no linear splitting"; }

  Matrix shifted(const Vector& y) const;  // C + diag(y)
  SpectralMax spectral(const Vector& y, double mu) const;

 private:
  Matrix c_;
  ProxTerm h_;
};

}  // namespace nsopt
