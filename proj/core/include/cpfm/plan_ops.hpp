#pragma once

#include <memory>
#include <optional>

#include "cpfm/rng.hpp"
#include "cpfm/sinkhorn.hpp"
#include "cpfm/types.hpp"

namespace cpfm::planops {

/// Softmax-of-negative-distance blend of plan rows over the k nearest
/// subset points (same-class neighbors when x_label is given and the subset
/// is labeled). The result is a convex combination of plan rows, so it sums
/// to 1/n and stays nonnegative.
Vector interpolate_row(const Vector& x, const Dataset& subset,
                       const ot::TransportPlan& plan, int k,
                       std::optional<int> x_label = std::nullopt);

/// One training pair drawn from the coupling. When the mixture branch
/// fires, x comes from the full dataset and x_index is absent.
struct SamplePair {
  std::optional<Index> x_index;  // subset row, when drawn from pi directly
  Index y_index = 0;
  Vector x;  // resolved x(1) features either way
};

/// Draws (i, j) with probability pi_ij; with probability mixture_weight a
/// full-dataset point is used instead and its row comes from
/// interpolate_row. Owns its RNG; use one sampler per consumer.
class PlanSampler {
 public:
  /// Plain sampler over the coupling of `subset` (mixture branch disabled).
  PlanSampler(ot::TransportPlan plan, Dataset subset, std::uint64_t seed);

  /// Sampler with the interpolated branch over `full` enabled.
  PlanSampler(ot::TransportPlan plan, Dataset subset, Dataset full,
              double mixture_weight, int knn_k, std::uint64_t seed);

  SamplePair sample_pair();

  const ot::TransportPlan& plan() const { return plan_; }
  const Dataset& subset() const { return subset_; }

 private:
  Index draw_cell(Index& out_j);

  ot::TransportPlan plan_;
  Dataset subset_;
  std::optional<Dataset> full_;
  double mixture_weight_ = 0.0;
  int knn_k_ = 5;
  Rng rng_;
  std::vector<double> cdf_;  // flattened row-major cumulative pi
};

}  // namespace cpfm::planops
