#include "cpfm/sinkhorn.hpp"

#include <cmath>
#include <limits>

namespace cpfm::ot {
namespace {

// Row-wise log-sum-exp with max shift.
Vector lse_rows(const Matrix& m) {
  const Index n = m.rows();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double mx = m.row(i).maxCoeff();
    if (!std::isfinite(mx)) {
      out[i] = mx;
      continue;
    }
    out[i] = mx + std::log((m.row(i).array() - mx).exp().sum());
  }
  return out;
}

}  // namespace

double TransportPlan::marginal_residual() const {
  const Index n = entries.rows();
  const double target = 1.0 / static_cast<double>(n);
  const double row = (entries.rowwise().sum().array() - target).abs().maxCoeff();
  const double col = (entries.colwise().sum().array() - target).abs().maxCoeff();
  return std::max(row, col);
}

SinkhornResult sinkhorn(const Matrix& cost, double epsilon,
                        const SinkhornOptions& opts) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!cost.allFinite()) throw ValidationError("cost matrix must be finite");
  const Index n = cost.rows();
  if (cost.cols() != n) throw ShapeMismatch("cost matrix must be square");

  const double log_marginal = -std::log(static_cast<double>(n));

  Vector f = opts.warm_f && opts.warm_f->size() == n ? *opts.warm_f
                                                     : Vector::Zero(n);
  Vector g = opts.warm_g && opts.warm_g->size() == n ? *opts.warm_g
                                                     : Vector::Zero(n);

  SinkhornResult res;
  res.residual = std::numeric_limits<double>::infinity();
  Matrix scaled(n, n);
  for (int it = 1; it <= opts.max_iter; ++it) {
    // f update: rows of ((g - C) / eps), then g update symmetrically.
    scaled = ((-cost).rowwise() + g.transpose()) / epsilon;
    f = epsilon * (Vector::Constant(n, log_marginal) - lse_rows(scaled));
    scaled = ((-cost).colwise() + f).transpose() / epsilon;
    g = epsilon * (Vector::Constant(n, log_marginal) - lse_rows(scaled));
    if (!f.allFinite() || !g.allFinite())
      throw PrecisionFailure("sinkhorn potentials turned non-finite");

    Matrix log_plan = (((-cost).colwise() + f).rowwise() + g.transpose()) / epsilon;
    res.plan.entries = log_plan.array().exp();
    if (!res.plan.entries.allFinite())
      throw PrecisionFailure("sinkhorn plan turned non-finite");
    res.iterations = it;
    res.residual = res.plan.marginal_residual();
    if (res.residual <= opts.tol) {
      res.f = std::move(f);
      res.g = std::move(g);
      return res;
    }
  }
  throw PrecisionFailure("sinkhorn did not reach tol " +
                         std::to_string(opts.tol) + " within " +
                         std::to_string(opts.max_iter) + " iterations");
}

double entropic_ot_value(const Matrix& cost, const TransportPlan& plan,
                         double epsilon) {
  const auto& p = plan.entries;
  double entropy = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (v > 0.0) entropy += v * (std::log(v) - 1.0);
    }
  }
  return cost.cwiseProduct(p).sum() + epsilon * entropy;
}

}  // namespace cpfm::ot
