#include "cpfm/lowrank.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace cpfm::lowrank {

GramFactor pivoted_cholesky(const GramMatrix& g, double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw ValidationError("eta must lie in (0, 1]");
  const Matrix& G = g.entries;
  const Index n = G.rows();
  if (G.cols() != n) throw ShapeMismatch("Gram matrix must be square");

  Vector diag = G.diagonal();
  const double trace = diag.sum();
  const double target = (1.0 - eta) * trace;
  const double pivot_floor = -1e-10 * std::max(trace, 1.0);
  // Pivots at or below this are numerically exhausted; taking them would
  // divide by ~0 without reducing the residual meaningfully.
  const double pivot_eps = 1e-14 * std::max(trace, 1.0);

  Matrix phi = Matrix::Zero(n, n);
  Index m = 0;
  double residual = trace;
  while (m < n && residual > target) {
    Index pivot = 0;
    const double dmax = diag.maxCoeff(&pivot);
    if (dmax < pivot_floor)
      throw IndefiniteGram("diagonal residual fell below PSD tolerance");
    if (dmax <= pivot_eps) break;
    Vector col = G.col(pivot) - phi.leftCols(m) * phi.row(pivot).head(m).transpose();
    col /= std::sqrt(dmax);
    phi.col(m) = col;
    diag -= col.array().square().matrix();
    for (Index i = 0; i < n; ++i)
      if (diag[i] < pivot_floor)
        throw IndefiniteGram("diagonal residual fell below PSD tolerance");
    residual = diag.sum();
    ++m;
  }

  GramFactor f;
  f.phi = phi.leftCols(m);
  f.weights = row_weights(g);
  f.rank = m;
  f.residual_trace = std::max(residual, 0.0);
  f.clipped_mass = 0.0;
  f.eta = eta;
  return f;
}

GramFactor eigen_factor(const GramMatrix& g, double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw ValidationError("eta must lie in (0, 1]");
  const Matrix& G = g.entries;
  const Index n = G.rows();
  if (G.cols() != n) throw ShapeMismatch("Gram matrix must be square");

  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const Vector& lambda = es.eigenvalues();  // ascending
  double positive_mass = 0.0;
  double negative_mass = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (lambda[i] > 0.0)
      positive_mass += lambda[i];
    else
      negative_mass += -lambda[i];
  }

  // Retain the largest eigenvalues until they cover eta of the positive mass.
  Index m = 0;
  double covered = 0.0;
  for (Index i = n - 1; i >= 0 && lambda[i] > 0.0; --i) {
    if (covered >= eta * positive_mass && m > 0) break;
    covered += lambda[i];
    ++m;
  }

  GramFactor f;
  f.phi.resize(n, m);
  for (Index k = 0; k < m; ++k) {
    const Index src = n - 1 - k;
    f.phi.col(k) = es.eigenvectors().col(src) * std::sqrt(lambda[src]);
  }
  f.weights = row_weights(g);
  f.rank = m;
  f.residual_trace = std::max(positive_mass - covered, 0.0);
  const double total = positive_mass + negative_mass;
  f.clipped_mass = total > 0.0 ? negative_mass / total : 0.0;
  f.eta = eta;
  return f;
}

Vector row_weights(const GramMatrix& g) {
  if (!g.entries.allFinite())
    throw ValidationError("Gram matrix must be finite");
  return g.entries.rowwise().sum();
}

}  // namespace cpfm::lowrank
