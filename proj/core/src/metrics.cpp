#include "cpfm/metrics.hpp"

#include <cmath>

#include "cpfm/rng.hpp"
#include "cpfm/sinkhorn.hpp"

namespace cpfm::metrics {

Matrix gaussian_reference(Index n, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return rng.normal_matrix(n, dim);
}

double wasserstein_to_gaussian(const Matrix& y, double epsilon,
                               std::uint64_t seed) {
  const Index n = y.rows();
  if (n < 2)
    throw ValidationError("wasserstein_to_gaussian needs at least two points");
  const Matrix z = gaussian_reference(n, y.cols(), seed);
  Matrix cost(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      cost(i, j) = (y.row(i) - z.row(j)).squaredNorm();
  const auto res = ot::sinkhorn(cost, epsilon);
  return ot::entropic_ot_value(cost, res.plan, epsilon);
}

double gwot_eval(const GramMatrix& g, const Matrix& y) {
  const Index n = g.size();
  if (y.rows() != n) throw ShapeMismatch("gram and embedding sizes disagree");
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      total += g.entries(i, j) * (y.row(i) - y.row(j)).squaredNorm();
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

double aggregate_mean(const std::vector<double>& runs) {
  if (runs.empty()) throw InsufficientRuns("mean needs at least one run");
  double s = 0.0;
  for (double v : runs) s += v;
  return s / static_cast<double>(runs.size());
}

std::pair<double, double> aggregate(const std::vector<double>& runs) {
  const double mean = aggregate_mean(runs);
  if (runs.size() < 2)
    throw InsufficientRuns("standard deviation needs at least two runs");
  double ss = 0.0;
  for (double v : runs) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(runs.size() - 1))};
}

}  // namespace cpfm::metrics
