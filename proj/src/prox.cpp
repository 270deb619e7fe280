#include "nsopt/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsopt/error.hpp"

namespace nsopt {

namespace {

void require_positive_step(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::NonPositiveStep, std::string(what) + " needs t > 0, got " + std::to_string(t));
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix reshape(const Vector& v, std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, v.values());
}

Vector flatten(const Matrix& m) { return Vector(m.values()); }

Vector gather(const Vector& x, const std::vector<std::size_t>& idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

}  // namespace

Vector prox_l1(const Vector& x, double t) {
  require_positive_step(t, "prox_l1");
  require_finite(x, "prox_l1 input");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = sign(x[i]) * std::max(std::abs(x[i]) - t, 0.0);
  }
  return out;
}

Vector prox_l2norm(const Vector& x, double t) {
  require_positive_step(t, "prox_l2norm");
  require_finite(x, "prox_l2norm input");
  const double n = norm(x);
  if (n <= t) return Vector(x.size());
  return (1.0 - t / n) * x;
}

Vector project_linf_ball(const Vector& x, double r) {
  require_positive_step(r, "project_linf_ball");
  require_finite(x, "project_linf_ball input");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], -r, r);
  return out;
}

Vector project_l2_ball(const Vector& x, double r) {
  require_positive_step(r, "project_l2_ball");
  require_finite(x, "project_l2_ball input");
  const double n = norm(x);
  if (n <= r) return x;
  return (r / n) * x;
}

Matrix prox_nuclear(const Matrix& x, double t) {
  require_positive_step(t, "prox_nuclear");
  const Svd svd = thin_svd(x);
  Matrix out(x.rows(), x.cols());
  for (std::size_t k = 0; k < svd.s.size(); ++k) {
    const double s = svd.s[k] - t;
    if (s <= 0.0) continue;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double ui = s * svd.u(i, k);
      if (ui == 0.0) continue;
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += ui * svd.v(j, k);
    }
  }
  return out;
}

Vector project_box(const Vector& x, const Vector& lo, const Vector& hi) {
  if (lo.size() != x.size() || hi.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "project_box bounds do not match input length");
  }
  require_finite(x, "project_box input");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw Error(ErrorCode::InvertedBounds, "lo > hi at index " + std::to_string(i));
    }
    out[i] = std::clamp(x[i], lo[i], hi[i]);
  }
  return out;
}

// ---------------------------------------------------------------- ProxTerm

std::string_view to_string(ProxKind kind) {
  switch (kind) {
    case ProxKind::Zero: return "zero";
    case ProxKind::L1: return "l1";
    case ProxKind::L2Norm: return "l2norm";
    case ProxKind::SquaredL2: return "squared_l2";
    case ProxKind::LinfBall: return "linf_ball";
    case ProxKind::L2Ball: return "l2_ball";
    case ProxKind::Box: return "box";
    case ProxKind::Nuclear: return "nuclear";
  }
  return "unknown";
}

ProxKind prox_kind_from_string(std::string_view name) {
  for (ProxKind k : {ProxKind::Zero, ProxKind::L1, ProxKind::L2Norm, ProxKind::SquaredL2,
                     ProxKind::LinfBall, ProxKind::L2Ball, ProxKind::Box, ProxKind::Nuclear}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown prox kind '" + std::string(name) + "'");
}

ProxTerm ProxTerm::zero() { return ProxTerm{}; }

ProxTerm ProxTerm::l1(double weight) {
  ProxTerm t;
  t.kind = ProxKind::L1;
  t.weight = weight;
  return t;
}

ProxTerm ProxTerm::l2norm(double weight) {
  ProxTerm t;
  t.kind = ProxKind::L2Norm;
  t.weight = weight;
  return t;
}

ProxTerm ProxTerm::squared_l2(double weight) {
  ProxTerm t;
  t.kind = ProxKind::SquaredL2;
  t.weight = weight;
  return t;
}

ProxTerm ProxTerm::linf_ball(double radius) {
  ProxTerm t;
  t.kind = ProxKind::LinfBall;
  t.radius = radius;
  return t;
}

ProxTerm ProxTerm::l2_ball(double radius) {
  ProxTerm t;
  t.kind = ProxKind::L2Ball;
  t.radius = radius;
  return t;
}

ProxTerm ProxTerm::box(Vector lo, Vector hi) {
  ProxTerm t;
  t.kind = ProxKind::Box;
  t.lo = std::move(lo);
  t.hi = std::move(hi);
  return t;
}

ProxTerm ProxTerm::nuclear(std::size_t rows, std::size_t cols, double weight) {
  ProxTerm t;
  t.kind = ProxKind::Nuclear;
  t.rows = rows;
  t.cols = cols;
  t.weight = weight;
  return t;
}

ProxTerm ProxTerm::restricted_to(std::vector<std::size_t> indices) const {
  ProxTerm t = *this;
  t.support = std::move(indices);
  return t;
}

bool ProxTerm::is_indicator() const noexcept {
  return kind == ProxKind::LinfBall || kind == ProxKind::L2Ball || kind == ProxKind::Box;
}

std::size_t ProxTerm::active_size(std::size_t n) const noexcept {
  return support.empty() ? n : support.size();
}

void ProxTerm::validate(std::size_t n) const {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw Error(ErrorCode::InvalidArgument, "term weight must be finite and >= 0");
  }
  for (std::size_t i : support) {
    if (i >= n) throw Error(ErrorCode::DimensionMismatch, "term support index out of range");
  }
  const std::size_t m = active_size(n);
  switch (kind) {
    case ProxKind::LinfBall:
    case ProxKind::L2Ball:
      if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be > 0");
      break;
    case ProxKind::Box:
      if (lo.size() != m || hi.size() != m) {
        throw Error(ErrorCode::DimensionMismatch, "box bounds do not match term size");
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (lo[i] > hi[i]) throw Error(ErrorCode::InvertedBounds, "lo > hi at index " + std::to_string(i));
      }
      break;
    case ProxKind::Nuclear:
      if (rows * cols != m || rows == 0) {
        throw Error(ErrorCode::DimensionMismatch, "nuclear reshape " + std::to_string(rows) + "x" +
                                                      std::to_string(cols) + " does not cover " +
                                                      std::to_string(m) + " entries");
      }
      break;
    default:
      break;
  }
}

namespace {

double dense_value(const ProxTerm& g, const Vector& x) {
  switch (g.kind) {
    case ProxKind::Zero: return 0.0;
    case ProxKind::L1: return g.weight * norm1(x);
    case ProxKind::L2Norm: return g.weight * norm(x);
    case ProxKind::SquaredL2: return g.weight * dot(x, x);
    case ProxKind::LinfBall: return norm_inf(x) <= g.radius ? 0.0 : kInf;
    case ProxKind::L2Ball: return norm(x) <= g.radius * (1.0 + 1e-12) ? 0.0 : kInf;
    case ProxKind::Box:
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < g.lo[i] || x[i] > g.hi[i]) return kInf;
      return 0.0;
    case ProxKind::Nuclear: {
      if (g.weight == 0.0) return 0.0;
      return g.weight * norm1(thin_svd(reshape(x, g.rows, g.cols)).s);
    }
  }
  return 0.0;
}

Vector dense_prox(const ProxTerm& g, const Vector& x, double t) {
  const double tw = t * g.weight;
  switch (g.kind) {
    case ProxKind::Zero: return x;
    case ProxKind::L1: return tw > 0.0 ? prox_l1(x, tw) : x;
    case ProxKind::L2Norm: return tw > 0.0 ? prox_l2norm(x, tw) : x;
    case ProxKind::SquaredL2: return (1.0 / (1.0 + 2.0 * tw)) * x;
    case ProxKind::LinfBall: return project_linf_ball(x, g.radius);
    case ProxKind::L2Ball: return project_l2_ball(x, g.radius);
    case ProxKind::Box: return project_box(x, g.lo, g.hi);
    case ProxKind::Nuclear:
      if (tw == 0.0) return x;
      return flatten(prox_nuclear(reshape(x, g.rows, g.cols), tw));
  }
  return x;
}

Vector dense_subgradient(const ProxTerm& g, const Vector& x) {
  switch (g.kind) {
    case ProxKind::L1: {
      Vector s(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) s[i] = g.weight * sign(x[i]);
      return s;
    }
    case ProxKind::L2Norm: {
      const double n = norm(x);
      if (n == 0.0) return Vector(x.size());
      return (g.weight / n) * x;
    }
    case ProxKind::SquaredL2: return (2.0 * g.weight) * x;
    case ProxKind::Nuclear: {
      const Svd svd = thin_svd(reshape(x, g.rows, g.cols));
      Matrix uv(g.rows, g.cols);
      const double tol = 1e-12 * std::max(1.0, svd.s.size() ? svd.s[0] : 0.0);
      for (std::size_t k = 0; k < svd.s.size(); ++k) {
        if (svd.s[k] <= tol) continue;
        for (std::size_t i = 0; i < g.rows; ++i)
          for (std::size_t j = 0; j < g.cols; ++j) uv(i, j) += svd.u(i, k) * svd.v(j, k);
      }
      return g.weight * flatten(uv);
    }
    default: return Vector(x.size());
  }
}

}  // namespace

double ProxTerm::value(const Vector& x) const {
  require_finite(x, "term value input");
  if (support.empty()) return dense_value(*this, x);
  return dense_value(*this, gather(x, support));
}

Vector ProxTerm::prox(const Vector& x, double t) const {
  require_positive_step(t, "term prox");
  require_finite(x, "term prox input");
  if (support.empty()) return dense_prox(*this, x, t);
  Vector out = x;
  const Vector p = dense_prox(*this, gather(x, support), t);
  for (std::size_t i = 0; i < support.size(); ++i) out[support[i]] = p[i];
  return out;
}

std::optional<double> ProxTerm::lipschitz_sq(std::size_t n) const {
  const double w2 = weight * weight;
  const auto m = static_cast<double>(active_size(n));
  switch (kind) {
    case ProxKind::Zero: return 0.0;
    case ProxKind::L1: return w2 * m;
    case ProxKind::L2Norm: return w2;
    case ProxKind::Nuclear: return w2 * static_cast<double>(std::min(rows, cols));
    case ProxKind::SquaredL2:
      if (weight == 0.0) return 0.0;
      return std::nullopt;
    case ProxKind::LinfBall:
    case ProxKind::L2Ball:
    case ProxKind::Box: return std::nullopt;
  }
  return std::nullopt;
}

Vector ProxTerm::subgradient(const Vector& x) const {
  if (support.empty()) return dense_subgradient(*this, x);
  Vector out(x.size());
  const Vector s = dense_subgradient(*this, gather(x, support));
  for (std::size_t i = 0; i < support.size(); ++i) out[support[i]] = s[i];
  return out;
}

}  // namespace nsopt
