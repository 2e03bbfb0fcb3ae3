#include "cpfm/plan_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cpfm::planops {

Vector interpolate_row(const Vector& x, const Dataset& subset,
                       const ot::TransportPlan& plan, int k,
                       std::optional<int> x_label) {
  const Index n = subset.size();
  if (plan.entries.rows() != n)
    throw ShapeMismatch("plan rows do not match subset size");
  if (x.size() != subset.dim())
    throw ShapeMismatch("query dimension does not match subset");
  if (k < 1) throw ValidationError("k must be at least 1");

  std::vector<Index> candidates;
  candidates.reserve(n);
  if (x_label) {
    if (!subset.labels)
      throw MissingLabels("class-restricted interpolation needs subset labels");
    for (Index i = 0; i < n; ++i)
      if ((*subset.labels)[i] == *x_label) candidates.push_back(i);
  } else {
    for (Index i = 0; i < n; ++i) candidates.push_back(i);
  }
  if (static_cast<int>(candidates.size()) < k)
    throw InsufficientNeighbors("need " + std::to_string(k) +
                                " neighbors, have " +
                                std::to_string(candidates.size()));

  std::vector<std::pair<double, Index>> dist;
  dist.reserve(candidates.size());
  for (Index i : candidates)
    dist.emplace_back((subset.features.row(i).transpose() - x).norm(), i);
  std::sort(dist.begin(), dist.end());
  dist.resize(k);

  // Softmax of negative Euclidean distances over the k neighbors.
  const double dmin = dist.front().first;
  double denom = 0.0;
  for (const auto& [d, i] : dist) denom += std::exp(-(d - dmin));
  Vector row = Vector::Zero(plan.entries.cols());
  for (const auto& [d, i] : dist)
    row += (std::exp(-(d - dmin)) / denom) * plan.entries.row(i).transpose();
  return row;
}

PlanSampler::PlanSampler(ot::TransportPlan plan, Dataset subset,
                         std::uint64_t seed)
    : plan_(std::move(plan)), subset_(std::move(subset)), rng_(seed) {
  const auto& p = plan_.entries;
  if (p.rows() != subset_.size())
    throw ShapeMismatch("plan rows do not match subset size");
  cdf_.resize(static_cast<size_t>(p.size()));
  double acc = 0.0;
  size_t idx = 0;
  for (Index i = 0; i < p.rows(); ++i)
    for (Index j = 0; j < p.cols(); ++j) {
      acc += std::max(p(i, j), 0.0);
      cdf_[idx++] = acc;
    }
  if (acc <= 0.0) throw ValidationError("plan has no mass");
  for (auto& v : cdf_) v /= acc;
}

PlanSampler::PlanSampler(ot::TransportPlan plan, Dataset subset, Dataset full,
                         double mixture_weight, int knn_k, std::uint64_t seed)
    : PlanSampler(std::move(plan), std::move(subset), seed) {
  if (mixture_weight < 0.0 || mixture_weight > 1.0)
    throw ValidationError("mixture_weight must lie in [0, 1]");
  full_ = std::move(full);
  mixture_weight_ = mixture_weight;
  knn_k_ = knn_k;
}

Index PlanSampler::draw_cell(Index& out_j) {
  const double u = rng_.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const Index flat = static_cast<Index>(
      std::min<size_t>(it - cdf_.begin(), cdf_.size() - 1));
  const Index cols = plan_.entries.cols();
  out_j = flat % cols;
  return flat / cols;
}

SamplePair PlanSampler::sample_pair() {
  if (full_ && mixture_weight_ > 0.0 && rng_.bernoulli(mixture_weight_)) {
    const Index pick = static_cast<Index>(rng_.below(full_->size()));
    const Vector x = full_->features.row(pick).transpose();
    std::optional<int> label;
    if (full_->labels && subset_.labels) label = (*full_->labels)[pick];
    Vector row = interpolate_row(x, subset_, plan_, knn_k_, label);
    // Row mass is 1/n; scale to a distribution over j.
    const double mass = row.sum();
    double u = rng_.uniform() * mass;
    Index j = 0;
    for (; j < row.size() - 1; ++j) {
      u -= row[j];
      if (u <= 0.0) break;
    }
    return SamplePair{std::nullopt, j, x};
  }
  Index j = 0;
  const Index i = draw_cell(j);
  return SamplePair{i, j, subset_.features.row(i).transpose()};
}

}  // namespace cpfm::planops
