#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpfm/sinkhorn.hpp"
#include "cpfm/types.hpp"

namespace cpfm::oracle {

/// Minimizes the entropic OT objective directly over the transport polytope
/// by projected descent (double-centering projection, Barzilai-Borwein step
/// with backtracking). Shares no numerical machinery with the Sinkhorn
/// solver, so agreement between the two is evidence. n <= 3.
ot::TransportPlan entropic_ot_bruteforce(const Matrix& cost, double epsilon);

struct PermutationScan {
  std::vector<Index> best;  // j = best[i]
  double objective = 0.0;
};

/// Evaluates the quadratic coupling objective at every permutation plan
/// (1/n) P and returns the minimum. n <= 8. The per-permutation evaluation
/// is self-contained.
PermutationScan permutation_coupling_scan(const GramMatrix& g, const Matrix& y);

/// Max over random feasible plans of the relative gap
/// |2 * variational(pi, A*(pi)) - quadratic(pi)| / max(1, |quadratic(pi)|).
/// Plans are random positive matrices scaled to uniform marginals.
double identity_check_factor2(const GramMatrix& g, const Matrix& y, int trials,
                              std::uint64_t seed);

/// Relative discrepancy between the squared-loss GW objective
/// sum (|dx|^2 - |dy|^2)^2 pi pi and its marginal-constants-minus-cross-term
/// expansion. n <= 6.
double gw_expand_check(const Matrix& x, const Matrix& y,
                       const ot::TransportPlan& plan);

struct OracleReport {
  std::string name;
  double max_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Runs every oracle on randomized instances; backs the `oracle run-all`
/// CLI subcommand.
std::vector<OracleReport> run_all(std::uint64_t seed);

}  // namespace cpfm::oracle
