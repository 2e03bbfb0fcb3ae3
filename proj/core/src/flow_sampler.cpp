#include "cpfm/flow_sampler.hpp"

#include "cpfm/rng.hpp"

namespace cpfm::flow {

DriftField drift_of(const dcfm::DriftNet& net) {
  return [&net](const Vector& state, const Vector& condition, double t,
                int role) {
    return role == 0 ? net.forward(state, condition, t, 0)
                     : net.forward(condition, state, t, 1);
  };
}

Vector euler_sample(const DriftField& field, Index state_dim,
                    const SampleRequest& req) {
  if (req.steps < 1) throw ValidationError("steps must be at least 1");
  if (req.role != 0 && req.role != 1)
    throw ValidationError("role must be 0 or 1");
  Rng rng(req.seed);
  Vector z = rng.normal_vector(state_dim);
  const double dt = 1.0 / static_cast<double>(req.steps);
  for (int k = 0; k < req.steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(req.steps);
    z += dt * field(z, req.condition, t, req.role);
  }
  return z;
}

std::vector<Vector> grid_generate(const dcfm::DriftNet& net,
                                  const GridSpec& spec, int steps,
                                  std::uint64_t base_seed) {
  if (net.config().d_y != 2)
    throw DimensionError("grid generation requires a 2-d embedding space");
  if (spec.k < 2) throw ValidationError("grid needs at least 2 points per axis");
  const double delta = (spec.hi - spec.lo) / static_cast<double>(spec.k - 1);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(spec.k) * spec.k);
  const DriftField field = drift_of(net);
  for (int u = 0; u < spec.k; ++u) {
    for (int v = 0; v < spec.k; ++v) {
      Vector cond(2);
      cond << spec.lo + u * delta, spec.lo + v * delta;
      SampleRequest req;
      req.condition = std::move(cond);
      req.role = 0;
      req.steps = steps;
      req.seed = base_seed + static_cast<std::uint64_t>(u) * spec.k + v;
      out.push_back(euler_sample(field, net.config().d_x, req));
    }
  }
  return out;
}

}  // namespace cpfm::flow
