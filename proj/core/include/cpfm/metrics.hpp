#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cpfm/types.hpp"

namespace cpfm::metrics {

/// Entropic OT objective between the rows of Y and n fresh draws from the
/// standard normal (squared Euclidean cost, uniform marginals).
double wasserstein_to_gaussian(const Matrix& y, double epsilon,
                               std::uint64_t seed);

/// The reference cloud used by wasserstein_to_gaussian for a given seed;
/// exposed so tests can evaluate the Y == reference case.
Matrix gaussian_reference(Index n, Index dim, std::uint64_t seed);

/// (1/n^2) sum_ij G_ij |y_i - y_j|^2: the identity-matching transport value.
double gwot_eval(const GramMatrix& g, const Matrix& y);

/// Mean and unbiased sample standard deviation over runs. Throws
/// InsufficientRuns for the deviation when fewer than two runs are given.
std::pair<double, double> aggregate(const std::vector<double>& runs);
double aggregate_mean(const std::vector<double>& runs);

}  // namespace cpfm::metrics
