#pragma once

#include <functional>

#include "nsopt/numerics.hpp"
#include "nsopt/prox.hpp"

namespace nsopt {

// Moreau envelope g_mu(x) = min_u g(u) + ||u - x||^2 / (2 mu), evaluated at
// u = prox_{mu g}(x).
double moreau_value(const ProxTerm& term, const Vector& x, double mu);
// (x - prox_{mu g}(x)) / mu
Vector moreau_grad(const ProxTerm& term, const Vector& x, double mu);

enum class ResidualNorm { L1, L2 };

struct ValueGrad {
  double value = 0.0;
  Vector grad;
};

struct SmoothedNorm {
  double value = 0.0;
  Vector dual;  // maximizer y of <y, r> - (mu/2)||y||^2 over the dual ball
};

// Smoothed w*||r||_p via its dual ball of radius w (B_inf for L1, B_2 for L2).
// mu == 0 is accepted and yields the unsmoothed norm with a subgradient as dual.
SmoothedNorm smoothed_norm(const Vector& r, double mu, ResidualNorm kind, double weight = 1.0);

// Smoothed ||A x - b||_p; grad = A^T y*.
ValueGrad smoothed_residual_grad(const Matrix& a, const Vector& b, const Vector& x, double mu,
                                 ResidualNorm kind);

struct SpectralMax {
  double value = 0.0;
  Matrix grad;      // Q diag(weights) Q^T
  Vector weights;   // softmax(lambda / mu), sums to one
  SymEig eig;
};

// mu * log sum exp(lambda_i(X) / mu), shifted by lambda_max.
SpectralMax spectral_max_value_grad(const Matrix& x, double mu);

using GradientOracle = std::function<Vector(const Vector&)>;

// (x - prox_{zeta h}(x - zeta * grad)) / zeta
Vector gradient_mapping(const Vector& grad, const ProxTerm& h, const Vector& x, double zeta);
Vector gradient_mapping(const GradientOracle& grad_f, const ProxTerm& h, const Vector& x, double zeta);

struct BoundCheck {
  bool lower_ok = false;  // f_mu(x) <= f(x)
  bool upper_ok = false;  // f(x) <= f_mu(x) + mu L^2 / 2
  double f = 0.0;
  double f_mu = 0.0;
  double bias_bound = 0.0;
};

inline constexpr double kBoundSlack = 1e-9;

BoundCheck uniform_bound_check(const ProxTerm& term, const Vector& x, double mu);

}  // namespace nsopt
