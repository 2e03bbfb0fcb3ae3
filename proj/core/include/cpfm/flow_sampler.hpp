#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cpfm/dcfm.hpp"
#include "cpfm/types.hpp"

namespace cpfm::flow {

/// Drift evaluated at (state, condition, t, role). For role 0 the state
/// lives in x-space and the condition is an embedding; for role 1 the
/// other way around.
using DriftField =
    std::function<Vector(const Vector& state, const Vector& condition,
                         double t, int role)>;

/// Adapts a trained net to the integrator interface.
DriftField drift_of(const dcfm::DriftNet& net);

struct SampleRequest {
  Vector condition;  // x when role = 1, y when role = 0
  int role = 0;
  int steps = 100;  // T >= 1
  std::uint64_t seed = 0;
};

/// Fixed-step Euler integration of dz/dt = u(z, c, t, r) from a seeded
/// standard-normal start, t_k = k/T. state_dim is the dimension of the
/// integrated space (d_x for role 0, d_y for role 1).
Vector euler_sample(const DriftField& field, Index state_dim,
                    const SampleRequest& req);

inline Vector euler_sample(const dcfm::DriftNet& net, const SampleRequest& req) {
  const Index dim = req.role == 0 ? net.config().d_x : net.config().d_y;
  return euler_sample(drift_of(net), dim, req);
}

struct GridSpec {
  double lo = -1.5;
  double hi = 1.5;
  int k = 10;  // grid points per axis
};

/// Latent-grid extrapolation: decode every point of a K x K grid on
/// [lo, hi]^2 through the x-direction flow (role 0). Seeds derive from
/// base_seed + row-major index.
std::vector<Vector> grid_generate(const dcfm::DriftNet& net,
                                  const GridSpec& spec, int steps,
                                  std::uint64_t base_seed);

}  // namespace cpfm::flow
