#include "cpfm/gwot.hpp"

#include <cmath>
#include <limits>

namespace cpfm::gwot {
namespace {

Matrix cost_matrix(const lowrank::GramFactor& factor, const Matrix& aux,
                   const EmbeddingSet& emb, bool flip) {
  const Index n = factor.phi.rows();
  const Index m = factor.phi.cols();
  if (aux.rows() != m || aux.cols() != emb.dim())
    throw ShapeMismatch("auxiliary matrix shape does not match factor/embedding");
  if (emb.size() != n)
    throw ShapeMismatch("embedding count does not match factor");
  if (factor.weights.size() != n)
    throw ShapeMismatch("weight vector length does not match factor");

  const Vector w = factor.weights / static_cast<double>(n);
  Matrix c = w * emb.y_norm.transpose() - 2.0 * (factor.phi * aux * emb.y.transpose());
  return flip ? Matrix(-c) : c;
}

// Objective recorded per outer iteration, at matching (pi, A) and with the
// cost rebuilt at the fresh A. For the standard problem this is
// |A|^2 + <C(A), pi> (+ entropy); the flipped variant reports
// <C(A), pi> - |A|^2, which equals half the shifted GW objective.
struct TraceEntry {
  double regularized;
  double plain;
};

TraceEntry trace_value(const lowrank::GramFactor& factor, const Matrix& aux,
                       const EmbeddingSet& emb, const ot::TransportPlan& plan,
                       double epsilon, bool flip) {
  const Matrix c = cost_matrix(factor, aux, emb, flip);
  const double sign = flip ? -1.0 : 1.0;
  const double plain = c.cwiseProduct(plan.entries).sum() + sign * aux.squaredNorm();
  const double with_entropy =
      ot::entropic_ot_value(c, plan, epsilon) + sign * aux.squaredNorm();
  return {with_entropy, plain};
}

GwotResult run_alternation(const lowrank::GramFactor& factor,
                           const EmbeddingSet& emb, double epsilon, double tau,
                           const SolveOptions& opts, bool flip,
                           const Matrix* warm_aux) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  const Index m = factor.phi.cols();
  const Index dy = emb.dim();

  GwotResult res;
  res.final_epsilon = epsilon;
  Matrix aux = warm_aux ? *warm_aux : Matrix::Zero(m, dy);
  if (aux.rows() != m || aux.cols() != dy)
    throw ShapeMismatch("warm-start auxiliary matrix has wrong shape");

  ot::SinkhornOptions sopts;
  sopts.tol = opts.sinkhorn_tol;
  sopts.max_iter = opts.sinkhorn_max_iter;

  double prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_outer; ++it) {
    const Matrix c = cost_matrix(factor, aux, emb, flip);
    auto sr = ot::sinkhorn(c, epsilon, sopts);
    aux = update_aux(factor, sr.plan, emb);
    const TraceEntry entry =
        trace_value(factor, aux, emb, sr.plan, epsilon, flip);
    res.plan = std::move(sr.plan);
    res.aux = aux;
    res.objective_trace.push_back(entry.regularized);
    res.plain_trace.push_back(entry.plain);
    res.iterations = it;
    const double gap = prev - entry.regularized;
    prev = entry.regularized;
    if ((flip ? std::abs(gap) : gap) < tau) break;
  }
  return res;
}

}  // namespace

EmbeddingSet EmbeddingSet::from_matrix(Matrix points) {
  if (!points.allFinite())
    throw ValidationError("embedding matrix must be finite");
  EmbeddingSet e;
  e.y_norm = points.rowwise().squaredNorm();
  e.y = std::move(points);
  return e;
}

Matrix build_cost(const lowrank::GramFactor& factor, const Matrix& aux,
                  const EmbeddingSet& emb) {
  return cost_matrix(factor, aux, emb, /*flip=*/false);
}

Matrix update_aux(const lowrank::GramFactor& factor,
                  const ot::TransportPlan& plan, const EmbeddingSet& emb) {
  if (plan.entries.rows() != factor.phi.rows() ||
      plan.entries.cols() != emb.size())
    throw ShapeMismatch("plan shape does not match factor/embedding");
  return factor.phi.transpose() * plan.entries * emb.y;
}

double variational_objective(const lowrank::GramFactor& factor,
                             const ot::TransportPlan& plan, const Matrix& aux,
                             const EmbeddingSet& emb) {
  const Matrix c = build_cost(factor, aux, emb);
  return aux.squaredNorm() + c.cwiseProduct(plan.entries).sum();
}

double quadratic_objective(const GramMatrix& g, const EmbeddingSet& emb,
                           const ot::TransportPlan& plan) {
  const Index n = g.size();
  if (emb.size() != n || plan.entries.rows() != n || plan.entries.cols() != n)
    throw ShapeMismatch("gram/embedding/plan sizes disagree");
  Matrix ydist(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index jp = 0; jp < n; ++jp)
      ydist(j, jp) = (emb.y.row(j) - emb.y.row(jp)).squaredNorm();
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double pij = plan.entries(i, j);
      if (pij == 0.0) continue;
      for (Index ip = 0; ip < n; ++ip)
        for (Index jp = 0; jp < n; ++jp)
          total += pij * plan.entries(ip, jp) * g.entries(i, ip) * ydist(j, jp);
    }
  return total;
}

GwotResult solve(const lowrank::GramFactor& factor, const EmbeddingSet& emb,
                 double epsilon, double tau, const SolveOptions& opts) {
  return run_alternation(factor, emb, epsilon, tau, opts, /*flip=*/false,
                         nullptr);
}

GwotResult solve_adaptive(const lowrank::GramFactor& factor,
                          const EmbeddingSet& emb, double eps_init, double tau,
                          double delta, const SolveOptions& opts) {
  if (!(eps_init > 0.0)) throw ValidationError("eps_init must be positive");
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");

  double stable = std::numeric_limits<double>::quiet_NaN();
  double current = eps_init;
  GwotResult accepted;
  Matrix warm_aux = Matrix::Zero(factor.phi.cols(), emb.dim());

  while (true) {
    bool failed = false;
    GwotResult trial;
    if (opts.fail_hook && opts.fail_hook(current)) {
      failed = true;
    } else {
      try {
        trial = run_alternation(factor, emb, current, tau, opts,
                                /*flip=*/false, &warm_aux);
      } catch (const PrecisionFailure&) {
        failed = true;
      }
    }
    if (failed) {
      if (std::isnan(stable))
        throw NoStableEpsilon("initial epsilon " + std::to_string(current) +
                              " already hits the precision limit");
      current = 0.5 * (current + stable);  // backtrack toward last stable
    } else {
      accepted = std::move(trial);
      warm_aux = accepted.aux;
      stable = current;
      current = 0.5 * current;  // probe lower
    }
    if (std::abs(current - stable) < delta) break;
  }
  accepted.final_epsilon = stable;
  return accepted;
}

GwotResult sign_flipped_solve(const GramMatrix& dist_sq_gram,
                              const EmbeddingSet& emb, double epsilon,
                              double tau, double eta,
                              const SolveOptions& opts) {
  if (dist_sq_gram.entries.diagonal().cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("squared-distance gram must have zero diagonal");
  if (dist_sq_gram.entries.minCoeff() < 0.0)
    throw ValidationError("squared distances must be nonnegative");
  const auto factor = lowrank::eigen_factor(dist_sq_gram, eta);
  return run_alternation(factor, emb, epsilon, tau, opts, /*flip=*/true,
                         nullptr);
}

}  // namespace cpfm::gwot
