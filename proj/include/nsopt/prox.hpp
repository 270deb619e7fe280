#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "nsopt/numerics.hpp"

namespace nsopt {

// Closed-form proximal maps. Every step/radius argument must be positive.
Vector prox_l1(const Vector& x, double t);
Vector prox_l2norm(const Vector& x, double t);
Vector project_linf_ball(const Vector& x, double r);
Vector project_l2_ball(const Vector& x, double r);
Matrix prox_nuclear(const Matrix& x, double t);
Vector project_box(const Vector& x, const Vector& lo, const Vector& hi);

enum class ProxKind {
  Zero,
  L1,         // w * ||x||_1
  L2Norm,     // w * ||x||_2
  SquaredL2,  // w * ||x||_2^2
  LinfBall,   // indicator of ||x||_inf <= radius
  L2Ball,     // indicator of ||x||_2 <= radius
  Box,        // indicator of lo <= x <= hi
  Nuclear,    // w * sum of singular values of the rows x cols reshape
};

std::string_view to_string(ProxKind kind);
ProxKind prox_kind_from_string(std::string_view name);

// A convex, prox-friendly term g. When `support` is non-empty the term acts
// on x[support] only and is the identity (value 0) on the other coordinates.
struct ProxTerm {
  ProxKind kind = ProxKind::Zero;
  double weight = 1.0;
  double radius = 1.0;
  Vector lo;
  Vector hi;
  std::size_t rows = 0;  // nuclear reshape
  std::size_t cols = 0;
  std::vector<std::size_t> support;

  static ProxTerm zero();
  static ProxTerm l1(double weight);
  static ProxTerm l2norm(double weight);
  static ProxTerm squared_l2(double weight);
  static ProxTerm linf_ball(double radius);
  static ProxTerm l2_ball(double radius);
  static ProxTerm box(Vector lo, Vector hi);
  static ProxTerm nuclear(std::size_t rows, std::size_t cols, double weight);

  ProxTerm restricted_to(std::vector<std::size_t> indices) const;

  bool is_indicator() const noexcept;
  // Number of coordinates the term touches for an input of length n.
  std::size_t active_size(std::size_t n) const noexcept;

  // +inf outside the set for indicator kinds.
  double value(const Vector& x) const;
  // argmin_u t*g(u) + 0.5*||u - x||^2
  Vector prox(const Vector& x, double t) const;
  // Squared Lipschitz constant of g on R^n, nullopt when g is not Lipschitz.
  std::optional<double> lipschitz_sq(std::size_t n) const;
  // One element of the subdifferential; zero for indicators (x assumed feasible).
  Vector subgradient(const Vector& x) const;

  // Throws if the term's parameters are inconsistent with an input of length n.
  void validate(std::size_t n) const;
};

}  // namespace nsopt
