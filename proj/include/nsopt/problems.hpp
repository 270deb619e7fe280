#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsopt/numerics.hpp"
#include "nsopt/objective.hpp"
#include "nsopt/smoothing.hpp"

namespace nsopt {

enum class Family { LassoL1, LassoL2, MaxCutDual, FaultDiag, L1Mpc };

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

// Named data blocks per family:
//   lasso     B (m x n), b, x_natural; weight eta
//   maxcut    C (n x n); weight eta; label reg = l1 | squared_l2
//   fault     H (T x N), y, x_true; indices low_rank, sparse; weights tau, lambda
//   mpc       A, B, Q, P, D; q, d0, lo, hi, x0, x_ref, u_prev; weight lambda; param r
// `curvature` is the squared operator norm of the family's primary map
// (B, the diagonal embedding, H, D) and `lipschitz_sq` is L_f^2 of the smoothed term.
struct ProblemInstance {
  std::string name;
  Family family = Family::LassoL1;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  std::map<std::string, std::string> labels;
  std::map<std::string, double> weights;
  std::map<std::string, Matrix> matrices;
  std::map<std::string, Vector> vectors;
  std::map<std::string, std::vector<std::size_t>> indices;
  double curvature = 0.0;
  double lipschitz_sq = 0.0;

  const Matrix& matrix(const std::string& key) const;
  const Vector& vector(const std::string& key) const;
  double weight(const std::string& key) const;
  std::size_t dim() const;

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

struct LassoOptions {
  std::size_t n = 100;
  std::size_t m = 100;
  bool correlated = false;
  std::uint64_t seed = 42;
  ResidualNorm norm = ResidualNorm::L1;
  double eta = 1.0;
  double noise_std = 0.05;
};

ProblemInstance gen_lasso(const LassoOptions& opts);

enum class MaxCutReg { L1, SquaredL2 };

ProblemInstance gen_maxcut(std::size_t n, std::uint64_t seed, MaxCutReg reg, double eta);

struct FaultDiagOptions {
  std::size_t length = 60;  // T, rows of H
  std::size_t lag = 16;     // L, entries of the low-rank block
  std::uint64_t seed = 42;
  std::size_t rows = 0;        // low-rank reshape rows; 0 picks the largest divisor <= sqrt(L)
  std::size_t sparse_len = 0;  // 0 means L
  std::size_t faults = 3;
  double tau = 1.0;
  double lambda = 1.0;
  double noise_std = 0.01;
};

ProblemInstance gen_fault_diag(const FaultDiagOptions& opts);

struct MpcOptions {
  Matrix a;  // empty selects the double integrator
  Matrix b;
  Matrix q;  // state weight, empty means identity
  double lambda = 1.0;
  std::size_t horizon = 20;
  Vector u_min;  // per input; empty means -1
  Vector u_max;  // per input; empty means +1
  Vector x0;     // empty means (1, 0, ...)
  Vector x_ref;  // empty means zero
  Vector u_prev; // input applied before the horizon, empty means zero
  double dt = 0.1;
};

// Condensed input-only problem: 0.5 u'Pu + q'u + r + lambda ||Du - d0||_1 + box(u).
ProblemInstance gen_mpc(const MpcOptions& opts);

// Throws with the first inconsistency found.
void validate(const ProblemInstance& inst);

std::unique_ptr<Objective> make_objective(const ProblemInstance& inst);

// Seeded N(0,1) start, projected onto h when h is an indicator.
Vector initial_point(const ProblemInstance& inst, std::uint64_t seed);

std::string to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(std::string_view text);
void save_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path);

struct LibsvmData {
  Matrix features;
  Vector targets;
};

// "target idx:val ..." per line, 1-based indices, '#' starts a comment.
// Indices must increase within a line unless `lenient` is set.
LibsvmData parse_libsvm(std::istream& in, bool lenient = false);
LibsvmData load_libsvm(const std::string& path, bool lenient = false);

// LASSO instance over a regression dataset: ||X w - t||_p + eta ||w||_1.
ProblemInstance lasso_from_libsvm(const LibsvmData& data, const std::string& name, ResidualNorm norm, double eta);

}  // namespace nsopt
