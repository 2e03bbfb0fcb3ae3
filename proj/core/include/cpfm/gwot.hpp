#pragma once

#include <functional>
#include <vector>

#include "cpfm/lowrank.hpp"
#include "cpfm/sinkhorn.hpp"
#include "cpfm/types.hpp"

namespace cpfm::gwot {

/// Embedding draw D_y with cached squared row norms.
struct EmbeddingSet {
  Matrix y;       // n x d_y
  Vector y_norm;  // |y_j|^2

  static EmbeddingSet from_matrix(Matrix points);
  Index size() const { return y.rows(); }
  Index dim() const { return y.cols(); }
};

struct SolveOptions {
  double sinkhorn_tol = 1e-9;
  int sinkhorn_max_iter = 10000;
  int max_outer = 1000;
  /// Test hook for the adaptive scheduler: returning true marks the inner
  /// solve at that epsilon as a precision failure.
  std::function<bool(double)> fail_hook;
};

struct GwotResult {
  ot::TransportPlan plan;
  Matrix aux;  // m x d_y
  /// Regularized objective |A|^2 + <C(A), pi> + eps * sum pi (log pi - 1),
  /// evaluated at matching (pi, A) after each outer iteration. Non-increasing.
  std::vector<double> objective_trace;
  /// Same without the entropic term, for reporting.
  std::vector<double> plain_trace;
  double final_epsilon = 0.0;
  int iterations = 0;
};

/// Linear-assignment cost of the variational form:
/// C_ij = (w_i / n) |y_j|^2 - 2 <A, Phi_i y_j^T>. The 1/n carries the
/// empirical-measure weight of each sample; without it the linear term is
/// overcounted n-fold and the factor-2 equivalence with the quadratic
/// objective breaks.
Matrix build_cost(const lowrank::GramFactor& factor, const Matrix& aux,
                  const EmbeddingSet& emb);

/// Closed-form auxiliary update A = Phi^T pi Y.
Matrix update_aux(const lowrank::GramFactor& factor,
                  const ot::TransportPlan& plan, const EmbeddingSet& emb);

/// |A|_F^2 + <build_cost(factor, aux, emb), pi>.
double variational_objective(const lowrank::GramFactor& factor,
                             const ot::TransportPlan& plan, const Matrix& aux,
                             const EmbeddingSet& emb);

/// Exact quadruple sum  sum_{iji'j'} pi_ij pi_i'j' G_ii' |y_j - y_j'|^2.
/// O(n^4) oracle, intended for small n.
double quadratic_objective(const GramMatrix& g, const EmbeddingSet& emb,
                           const ot::TransportPlan& plan);

/// Alternating minimization at fixed epsilon, starting from A = 0 (or a
/// warm start). Stops when the regularized objective improves by less
/// than tau.
GwotResult solve(const lowrank::GramFactor& factor, const EmbeddingSet& emb,
                 double epsilon, double tau, const SolveOptions& opts = {});

/// Adaptive epsilon schedule: halve after every stable solve, bisect back
/// toward the last stable value after a precision failure, stop when the
/// bracket is narrower than delta. Warm-starts every attempt from the last
/// accepted (pi, A). Throws NoStableEpsilon if eps_init itself fails.
GwotResult solve_adaptive(const lowrank::GramFactor& factor,
                          const EmbeddingSet& emb, double eps_init, double tau,
                          double delta, const SolveOptions& opts = {});

/// Standard GWOT route: the Gram of squared Euclidean distances is factored
/// by eigen_factor and Algorithm-style alternation runs with the flipped
/// cost C = -(w/n) Y_norm^T + 2 Phi A Y^T, A-update unchanged.
GwotResult sign_flipped_solve(const GramMatrix& dist_sq_gram,
                              const EmbeddingSet& emb, double epsilon,
                              double tau, double eta = 1.0,
                              const SolveOptions& opts = {});

}  // namespace cpfm::gwot
