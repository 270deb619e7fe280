#include "nsopt/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsopt/error.hpp"

namespace nsopt {

namespace {

void require_mu(double mu, bool allow_zero) {
  const bool ok = std::isfinite(mu) && (allow_zero ? mu >= 0.0 : mu > 0.0);
  if (!ok) throw Error(ErrorCode::NonPositiveStep, "smoothing parameter must be > 0, got " + std::to_string(mu));
}

}  // namespace

double moreau_value(const ProxTerm& term, const Vector& x, double mu) {
  require_mu(mu, false);
  const Vector p = term.prox(x, mu);
  const double d = distance(p, x);
  // prox output is feasible, so the indicator part contributes 0
  const double g = term.is_indicator() ? 0.0 : term.value(p);
  return g + d * d / (2.0 * mu);
}

Vector moreau_grad(const ProxTerm& term, const Vector& x, double mu) {
  require_mu(mu, false);
  return (1.0 / mu) * (x - term.prox(x, mu));
}

SmoothedNorm smoothed_norm(const Vector& r, double mu, ResidualNorm kind, double weight) {
  require_mu(mu, true);
  require_finite(r, "smoothed residual");
  SmoothedNorm out{0.0, Vector(r.size())};
  const double cap = weight * mu;
  if (kind == ResidualNorm::L1) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double ri = r[i];
      double yi;
      if (std::abs(ri) >= cap) {
        yi = ri > 0.0 ? weight : (ri < 0.0 ? -weight : 0.0);
        out.value += weight * std::abs(ri) - 0.5 * mu * yi * yi;
      } else {
        yi = ri / mu;
        out.value += 0.5 * ri * yi;
      }
      out.dual[i] = yi;
    }
  } else {
    const double rn = norm(r);
    if (rn >= cap) {
      if (rn > 0.0) out.dual = (weight / rn) * r;
      out.value = weight * rn - 0.5 * mu * weight * weight;
      if (rn == 0.0) out.value = 0.0;
    } else {
      out.dual = (1.0 / mu) * r;
      out.value = 0.5 * rn * rn / mu;
    }
  }
  return out;
}

ValueGrad smoothed_residual_grad(const Matrix& a, const Vector& b, const Vector& x, double mu,
                                 ResidualNorm kind) {
  require_mu(mu, false);
  if (a.cols() != x.size() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "residual map is " + std::to_string(a.rows()) + "x" +
                                                  std::to_string(a.cols()) + ", x has " +
                                                  std::to_string(x.size()) + ", b has " +
                                                  std::to_string(b.size()));
  }
  const SmoothedNorm s = smoothed_norm(a * x - b, mu, kind);
  return {s.value, multiply_transposed(a, s.dual)};
}

SpectralMax spectral_max_value_grad(const Matrix& x, double mu) {
  require_mu(mu, true);
  SpectralMax out;
  out.eig = sym_eig(x);
  const std::size_t n = x.rows();
  const double top = out.eig.values[0];
  out.weights = Vector(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = out.eig.values[i] - top;
    const double w = d == 0.0 ? 1.0 : std::exp(d / mu);
    out.weights[i] = w;
    total += w;
  }
  out.value = top + mu * std::log(total);
  out.weights *= 1.0 / total;

  out.grad = Matrix(n, n);
  const Matrix& q = out.eig.vectors;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = out.weights[k];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = w * q(i, k);
      for (std::size_t j = i; j < n; ++j) out.grad(i, j) += wi * q(j, k);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) out.grad(i, j) = out.grad(j, i);
  return out;
}

Vector gradient_mapping(const Vector& grad, const ProxTerm& h, const Vector& x, double zeta) {
  if (!(zeta > 0.0)) throw Error(ErrorCode::NonPositiveStep, "gradient mapping needs zeta > 0");
  // prox of the zero term is the identity; skip the round trip through x
  if (h.kind == ProxKind::Zero) return grad;
  Vector step = x;
  axpy(-zeta, grad, step);
  return (1.0 / zeta) * (x - h.prox(step, zeta));
}

Vector gradient_mapping(const GradientOracle& grad_f, const ProxTerm& h, const Vector& x, double zeta) {
  return gradient_mapping(grad_f(x), h, x, zeta);
}

BoundCheck uniform_bound_check(const ProxTerm& term, const Vector& x, double mu) {
  const auto lsq = term.lipschitz_sq(x.size());
  if (!lsq) {
    throw Error(ErrorCode::UnboundedLipschitz,
                "term '" + std::string(to_string(term.kind)) + "' has no finite Lipschitz constant");
  }
  BoundCheck out;
  out.f = term.value(x);
  out.f_mu = moreau_value(term, x, mu);
  out.bias_bound = 0.5 * mu * *lsq;
  out.lower_ok = out.f_mu <= out.f + kBoundSlack;
  out.upper_ok = out.f <= out.f_mu + out.bias_bound + kBoundSlack;
  return out;
}

}  // namespace nsopt
