#include "cpfm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpfm/gwot.hpp"
#include "cpfm/lowrank.hpp"
#include "cpfm/rng.hpp"

namespace cpfm::oracle {
namespace {

// Orthogonal projection onto {M : rows sum 0, cols sum 0}.
Matrix center(const Matrix& m) {
  const Vector row_mean = m.rowwise().mean();
  const Vector col_mean = m.colwise().mean();
  const double total_mean = m.mean();
  Matrix out = m;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean.transpose();
  out.array() += total_mean;
  return out;
}

double objective(const Matrix& cost, const Matrix& pi, double epsilon) {
  double v = 0.0;
  for (Index i = 0; i < pi.rows(); ++i)
    for (Index j = 0; j < pi.cols(); ++j) {
      v += cost(i, j) * pi(i, j);
      if (pi(i, j) > 0.0) v += epsilon * pi(i, j) * (std::log(pi(i, j)) - 1.0);
    }
  return v;
}

// Scale a positive matrix to uniform 1/n marginals by alternating row and
// column normalization.
Matrix scale_to_uniform(Matrix m, double tol = 1e-14, int max_iter = 100000) {
  const Index n = m.rows();
  const double target = 1.0 / static_cast<double>(n);
  for (int it = 0; it < max_iter; ++it) {
    for (Index i = 0; i < n; ++i) m.row(i) *= target / m.row(i).sum();
    for (Index j = 0; j < n; ++j) m.col(j) *= target / m.col(j).sum();
    const double res =
        (m.rowwise().sum().array() - target).abs().maxCoeff();
    if (res <= tol) break;
  }
  return m;
}

}  // namespace

ot::TransportPlan entropic_ot_bruteforce(const Matrix& cost, double epsilon) {
  const Index n = cost.rows();
  if (n > 3) throw ValidationError("brute-force oracle is capped at n <= 3");
  if (cost.cols() != n) throw ShapeMismatch("cost matrix must be square");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");

  Matrix pi = Matrix::Constant(n, n, 1.0 / static_cast<double>(n * n));
  if (n == 1) return ot::TransportPlan{pi};

  Matrix grad = center(cost + epsilon * pi.array().log().matrix());
  double step = 1.0 / (epsilon * static_cast<double>(n * n));
  double f = objective(cost, pi, epsilon);
  for (int it = 0; it < 2000000; ++it) {
    if (grad.norm() <= 1e-10) break;
    // Longest step keeping every entry strictly positive.
    double cap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (grad(i, j) > 0.0) cap = std::min(cap, 0.999 * pi(i, j) / grad(i, j));
    double t = std::min(step, cap);
    Matrix trial;
    double f_trial = 0.0;
    for (int half = 0; half < 60; ++half) {
      trial = pi - t * grad;
      f_trial = objective(cost, trial, epsilon);
      if (f_trial <= f - 1e-4 * t * grad.squaredNorm()) break;
      t *= 0.5;
    }
    const Matrix grad_new =
        center(cost + epsilon * trial.array().log().matrix());
    // Barzilai-Borwein step for the next iterate.
    const Matrix ds = trial - pi;
    const Matrix dg = grad_new - grad;
    const double denom = (ds.array() * dg.array()).sum();
    step = denom > 0.0 ? ds.squaredNorm() / denom
                       : 1.0 / (epsilon * static_cast<double>(n * n));
    pi = trial;
    grad = grad_new;
    f = f_trial;
  }
  return ot::TransportPlan{pi};
}

PermutationScan permutation_coupling_scan(const GramMatrix& g,
                                          const Matrix& y) {
  const Index n = g.size();
  if (n > 8) throw ValidationError("permutation scan is capped at n <= 8");
  if (y.rows() != n) throw ShapeMismatch("gram and embedding sizes disagree");

  Matrix ydist(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      ydist(a, b) = (y.row(a) - y.row(b)).squaredNorm();

  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  PermutationScan best;
  best.objective = std::numeric_limits<double>::infinity();
  const double inv_n2 = 1.0 / static_cast<double>(n * n);
  do {
    double val = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index ip = 0; ip < n; ++ip)
        val += g.entries(i, ip) * ydist(perm[i], perm[ip]);
    val *= inv_n2;
    if (val < best.objective) {
      best.objective = val;
      best.best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double identity_check_factor2(const GramMatrix& g, const Matrix& y, int trials,
                              std::uint64_t seed) {
  const Index n = g.size();
  const auto factor = lowrank::pivoted_cholesky(g, 1.0);
  const auto emb = gwot::EmbeddingSet::from_matrix(y);
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Matrix raw(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) raw(i, j) = rng.uniform(0.5, 1.5);
    ot::TransportPlan pi{scale_to_uniform(std::move(raw))};
    const Matrix aux = gwot::update_aux(factor, pi, emb);
    const double variational =
        gwot::variational_objective(factor, pi, aux, emb);
    const double quadratic = gwot::quadratic_objective(g, emb, pi);
    const double err = std::abs(2.0 * variational - quadratic) /
                       std::max(1.0, std::abs(quadratic));
    worst = std::max(worst, err);
  }
  return worst;
}

double gw_expand_check(const Matrix& x, const Matrix& y,
                       const ot::TransportPlan& plan) {
  const Index n = x.rows();
  if (n > 6) throw ValidationError("expansion check is capped at n <= 6");
  if (y.rows() != n || plan.entries.rows() != n)
    throw ShapeMismatch("point sets and plan must share n");

  Matrix dx(n, n), dy(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) {
      dx(a, b) = (x.row(a) - x.row(b)).squaredNorm();
      dy(a, b) = (y.row(a) - y.row(b)).squaredNorm();
    }

  const auto& p = plan.entries;
  double direct = 0.0, cross = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index ip = 0; ip < n; ++ip)
        for (Index jp = 0; jp < n; ++jp) {
          const double w = p(i, j) * p(ip, jp);
          const double diff = dx(i, ip) - dy(j, jp);
          direct += diff * diff * w;
          cross += dx(i, ip) * dy(j, jp) * w;
        }
  const double inv_n2 = 1.0 / static_cast<double>(n * n);
  const double marginal_x = dx.array().square().sum() * inv_n2;
  const double marginal_y = dy.array().square().sum() * inv_n2;
  const double expanded = marginal_x + marginal_y - 2.0 * cross;
  return std::abs(direct - expanded) / std::max(1.0, std::abs(direct));
}

std::vector<OracleReport> run_all(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<OracleReport> reports;

  {
    OracleReport r{"sinkhorn-vs-bruteforce", 0.0, 1e-6, false};
    for (int trial = 0; trial < 10; ++trial) {
      const Index n = 2 + static_cast<Index>(rng.below(2));
      Matrix cost(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) cost(i, j) = rng.uniform(0.0, 10.0);
      const double eps = rng.uniform(0.3, 1.0);
      const auto direct = entropic_ot_bruteforce(cost, eps);
      const auto sk = ot::sinkhorn(cost, eps);
      r.max_error = std::max(
          r.max_error,
          (direct.entries - sk.plan.entries).cwiseAbs().maxCoeff());
    }
    r.pass = r.max_error <= r.threshold;
    reports.push_back(std::move(r));
  }

  {
    OracleReport r{"factor2-identity", 0.0, 1e-9, false};
    for (Index n = 2; n <= 8; ++n) {
      const Index dy = 1 + static_cast<Index>(rng.below(3));
      const Matrix phi = rng.normal_matrix(n, std::max<Index>(1, n - 1));
      GramMatrix g{phi * phi.transpose()};
      const Matrix y = rng.normal_matrix(n, dy);
      r.max_error =
          std::max(r.max_error, identity_check_factor2(g, y, 8, rng.below(1u << 30)));
    }
    r.pass = r.max_error <= r.threshold;
    reports.push_back(std::move(r));
  }

  {
    OracleReport r{"gw-expansion", 0.0, 1e-10, false};
    for (int trial = 0; trial < 10; ++trial) {
      const Index n = 2 + static_cast<Index>(rng.below(5));
      const Matrix x = rng.normal_matrix(n, 3);
      const Matrix y = rng.normal_matrix(n, 2);
      Matrix raw(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) raw(i, j) = rng.uniform(0.5, 1.5);
      ot::TransportPlan pi{scale_to_uniform(std::move(raw))};
      r.max_error = std::max(r.max_error, gw_expand_check(x, y, pi));
    }
    r.pass = r.max_error <= r.threshold;
    reports.push_back(std::move(r));
  }

  {
    // Two well-separated label clusters: class-consistent permutations of a
    // matched embedding pair tie for the scan minimum.
    OracleReport r{"permutation-scan", 0.0, 1e-12, false};
    Matrix g(4, 4);
    g << 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1;
    Matrix y(4, 2);
    y << 5, 0, 5.2, 0, -5, 0, -5.2, 0;
    const auto scan = permutation_coupling_scan(GramMatrix{g}, y);
    // Best pairing keeps each class on one side; its objective is the
    // within-class spread only.
    double expected = 0.0;
    for (Index i = 0; i < 4; ++i)
      for (Index ip = 0; ip < 4; ++ip)
        if (g(i, ip) > 0 && i != ip) expected += 0.2 * 0.2;
    expected /= 16.0;
    r.max_error = std::abs(scan.objective - expected);
    r.pass = r.max_error <= r.threshold;
    reports.push_back(std::move(r));
  }

  return reports;
}

}  // namespace cpfm::oracle
