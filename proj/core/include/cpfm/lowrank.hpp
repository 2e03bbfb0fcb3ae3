#pragma once

#include "cpfm/types.hpp"

namespace cpfm::lowrank {

/// Low-rank factor of a Gram matrix: phi * phi^T ~ G, rows of phi are the
/// per-sample feature vectors. weights are row sums of the exact G so that
/// truncation error never leaks into the linear transport term.
struct GramFactor {
  Matrix phi;            // n x m
  Vector weights;        // w_i = sum_j G_ij
  Index rank = 0;        // m
  double residual_trace = 0.0;
  double clipped_mass = 0.0;  // fraction of |spectrum| removed by eigen clipping
  double eta = 1.0;

  Index size() const { return phi.rows(); }
};

/// Greedy pivoted Cholesky on a PSD Gram matrix. Stops once the residual
/// trace drops to (1 - eta) * trace(G). Throws IndefiniteGram when a pivot
/// falls below -1e-10 * trace(G); route such kernels through eigen_factor.
GramFactor pivoted_cholesky(const GramMatrix& g, double eta);

/// Symmetric eigendecomposition fallback for indefinite kernels. Negative
/// eigenvalues are clipped to zero and the clipped spectral mass is
/// reported; retained eigenvalues cover >= eta of the positive mass.
GramFactor eigen_factor(const GramMatrix& g, double eta);

/// w_i = sum_j G_ij.
Vector row_weights(const GramMatrix& g);

}  // namespace cpfm::lowrank
