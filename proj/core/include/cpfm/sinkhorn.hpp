#pragma once

#include <optional>

#include "cpfm/types.hpp"

namespace cpfm::ot {

/// Coupling with uniform 1/n row and column marginals.
struct TransportPlan {
  Matrix entries;  // n x n, nonnegative

  Index size() const { return entries.rows(); }
  /// Largest absolute deviation of any row/column sum from 1/n.
  double marginal_residual() const;
};

struct SinkhornOptions {
  double tol = 1e-9;       // L-inf marginal residual
  int max_iter = 10000;
  const Vector* warm_f = nullptr;  // optional dual potential warm starts
  const Vector* warm_g = nullptr;
};

struct SinkhornResult {
  TransportPlan plan;
  Vector f;  // row potentials
  Vector g;  // column potentials
  int iterations = 0;
  double residual = 0.0;
};

/// Entropic linear OT with uniform marginals, solved in the log domain on
/// dual potentials (never exponentiates unshifted -C/eps). Throws
/// PrecisionFailure when a potential turns non-finite or the marginal
/// residual stays above tol after max_iter; the epsilon scheduler keys off
/// that error.
SinkhornResult sinkhorn(const Matrix& cost, double epsilon,
                        const SinkhornOptions& opts = {});

/// <C, pi> + eps * sum pi_ij (log pi_ij - 1), with 0 log 0 := 0.
double entropic_ot_value(const Matrix& cost, const TransportPlan& plan,
                         double epsilon);

}  // namespace cpfm::ot
