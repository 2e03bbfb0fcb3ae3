#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cpfm/plan_ops.hpp"
#include "cpfm/rng.hpp"
#include "cpfm/types.hpp"

namespace cpfm::dcfm {

/// Interpolant coefficients a_t, b_t with (a,b)(0) = (1,0) and
/// (a,b)(1) = (0,1), plus their time derivatives.
struct InterpolantSchedule {
  std::function<double(double)> a, b, a_dot, b_dot;
  int id = 0;
  std::string name;

  static InterpolantSchedule linear();  // a = 1-t, b = t
  static InterpolantSchedule trig();    // a = cos(pi t/2), b = sin(pi t/2)
  static InterpolantSchedule by_id(int id);
};

/// z_t = a(t) z0 + b(t) z1 and its velocity a'(t) z0 + b'(t) z1.
std::pair<Vector, Vector> interpolate(const InterpolantSchedule& s,
                                      const Vector& z0, const Vector& z1,
                                      double t);

struct NetConfig {
  int d_x = 1;
  int d_y = 1;
  int hidden_width = 256;
  int depth = 3;       // hidden layers
  int time_dim = 32;   // sinusoidal embedding size, even
  int schedule_id = 0;

  int input_dim() const { return d_x + d_y + time_dim + 2; }
};

/// Shared-trunk drift field with two decoding heads selected by the role
/// flag (r = 0 decodes in x-space, r = 1 in y-space). Parameters live in one
/// flat buffer so the optimizer, checkpoints, and finite-difference checks
/// all see a single canonical ordering: W0, b0, ..., head_x, bias_x,
/// head_y, bias_y, role_embed.
class DriftNet {
 public:
  DriftNet() = default;
  explicit DriftNet(const NetConfig& cfg);

  /// GELU trunk + per-role linear head, deterministic given parameters.
  Vector forward(const Vector& x_state, const Vector& y_state, double t,
                 int role) const;

  void init_params(Rng& rng);

  const NetConfig& config() const { return cfg_; }
  std::vector<double>& params() { return theta_; }
  const std::vector<double>& params() const { return theta_; }
  std::size_t num_params() const { return theta_.size(); }

  /// Sinusoidal features of t (fixed, not learned).
  Vector time_embedding(double t) const;

  // Flat-buffer layout (also the checkpoint order).
  struct Layout {
    struct Block {
      std::size_t offset;
      Index rows, cols;  // cols == 1 for vectors
    };
    std::vector<Block> trunk_w, trunk_b;
    Block head_x, bias_x, head_y, bias_y, role_embed;
    std::size_t total = 0;
  };
  const Layout& layout() const { return layout_; }

 private:
  friend struct BatchWorkspace;
  NetConfig cfg_;
  Layout layout_;
  std::vector<double> theta_;
};

struct BatchSample {
  int role = 0;
  double t = 0.0;
  Vector x_state;  // interpolant x(t) when role 0, condition x(1) when role 1
  Vector y_state;  // condition y(1) when role 0, interpolant y(t) when role 1
  Vector target;   // velocity in the active space
};

/// |u(x_t, y1, t, 0) - v|^2, summed over coordinates.
double loss_x(const DriftNet& net, double t, const Vector& x_t,
              const Vector& y1, const Vector& v_x);
/// |u(x1, y_t, t, 1) - v|^2.
double loss_y(const DriftNet& net, double t, const Vector& x1,
              const Vector& y_t, const Vector& v_y);

/// Mean loss over the batch; exact reverse-mode gradients of that mean when
/// grad_out is non-null. Only the active head of each sample receives
/// gradient (mute-masking).
double batch_loss(const DriftNet& net, const std::vector<BatchSample>& batch,
                  std::vector<double>* grad_out = nullptr);

inline std::vector<double> grad(const DriftNet& net,
                                const std::vector<BatchSample>& batch) {
  std::vector<double> g;
  batch_loss(net, batch, &g);
  return g;
}

/// Decoupled-weight-decay Adam over the flat parameter buffer.
class AdamW {
 public:
  AdamW() = default;
  AdamW(std::size_t n_params, double lr, double weight_decay,
        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<double>& params, const std::vector<double>& grads);
  long step_count() const { return step_; }

 private:
  std::vector<double> m_, v_;
  double lr_ = 1e-4, wd_ = 1e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long step_ = 0;
};

struct TrainConfig {
  double alpha = 0.5;  // P(role = 1)
  double lr = 1e-4;
  double weight_decay = 1e-4;
  int batch = 128;
  int epochs = 200;
  int steps_per_epoch = 0;  // 0: ceil(n / batch)
  std::uint64_t seed = 0;
  bool deterministic = true;
};

struct TrainState {
  DriftNet net;
  AdamW opt;
  TrainConfig cfg;
  long step_count = 0;
};

TrainState make_train_state(const NetConfig& net_cfg, const TrainConfig& cfg);

struct EpochLog {
  int epoch = 0;
  double mean_loss_x = 0.0;
  double mean_loss_y = 0.0;
  double wall_seconds = 0.0;
};

/// Algorithm: sample a coupling pair, a Bernoulli(alpha) role and a uniform
/// time, interpolate from the standard-normal base on the active side,
/// regress the drift on the velocity, update with AdamW. Deterministic for
/// a fixed seed.
std::vector<EpochLog> train(TrainState& state, planops::PlanSampler& sampler,
                            const InterpolantSchedule& schedule,
                            const Matrix& embeddings);

void save_checkpoint(const std::filesystem::path& path, const DriftNet& net);
DriftNet load_checkpoint(const std::filesystem::path& path);

}  // namespace cpfm::dcfm
