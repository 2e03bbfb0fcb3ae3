#include "cpfm/dcfm.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

namespace cpfm::dcfm {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / kSqrt2)); }

double gelu_prime(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / kSqrt2));
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

using Map = Eigen::Map<Matrix>;
using ConstMap = Eigen::Map<const Matrix>;

Map view(std::vector<double>& buf, const DriftNet::Layout::Block& b) {
  return Map(buf.data() + b.offset, b.rows, b.cols);
}
ConstMap view(const std::vector<double>& buf,
              const DriftNet::Layout::Block& b) {
  return ConstMap(buf.data() + b.offset, b.rows, b.cols);
}

}  // namespace

InterpolantSchedule InterpolantSchedule::linear() {
  InterpolantSchedule s;
  s.a = [](double t) { return 1.0 - t; };
  s.b = [](double t) { return t; };
  s.a_dot = [](double) { return -1.0; };
  s.b_dot = [](double) { return 1.0; };
  s.id = 0;
  s.name = "linear";
  return s;
}

InterpolantSchedule InterpolantSchedule::trig() {
  InterpolantSchedule s;
  s.a = [](double t) { return std::cos(0.5 * M_PI * t); };
  s.b = [](double t) { return std::sin(0.5 * M_PI * t); };
  s.a_dot = [](double t) { return -0.5 * M_PI * std::sin(0.5 * M_PI * t); };
  s.b_dot = [](double t) { return 0.5 * M_PI * std::cos(0.5 * M_PI * t); };
  s.id = 1;
  s.name = "trig";
  return s;
}

InterpolantSchedule InterpolantSchedule::by_id(int id) {
  switch (id) {
    case 0: return linear();
    case 1: return trig();
    default: throw ValidationError("unknown schedule id " + std::to_string(id));
  }
}

std::pair<Vector, Vector> interpolate(const InterpolantSchedule& s,
                                      const Vector& z0, const Vector& z1,
                                      double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw DomainError("interpolation time must lie in [0, 1]");
  if (z0.size() != z1.size())
    throw ShapeMismatch("interpolation endpoints differ in dimension");
  return {s.a(t) * z0 + s.b(t) * z1, s.a_dot(t) * z0 + s.b_dot(t) * z1};
}

DriftNet::DriftNet(const NetConfig& cfg) : cfg_(cfg) {
  if (cfg.d_x < 1 || cfg.d_y < 1)
    throw ValidationError("state dimensions must be positive");
  if (cfg.hidden_width < 1 || cfg.depth < 1)
    throw ValidationError("trunk must have positive width and depth");
  if (cfg.time_dim < 2 || cfg.time_dim % 2 != 0)
    throw ValidationError("time embedding dimension must be even and >= 2");

  std::size_t off = 0;
  auto block = [&off](Index rows, Index cols) {
    Layout::Block b{off, rows, cols};
    off += static_cast<std::size_t>(rows * cols);
    return b;
  };
  const Index w = cfg.hidden_width;
  layout_.trunk_w.push_back(block(w, cfg.input_dim()));
  layout_.trunk_b.push_back(block(w, 1));
  for (int l = 1; l < cfg.depth; ++l) {
    layout_.trunk_w.push_back(block(w, w));
    layout_.trunk_b.push_back(block(w, 1));
  }
  layout_.head_x = block(cfg.d_x, w);
  layout_.bias_x = block(cfg.d_x, 1);
  layout_.head_y = block(cfg.d_y, w);
  layout_.bias_y = block(cfg.d_y, 1);
  layout_.role_embed = block(2, 2);
  layout_.total = off;
  theta_.assign(off, 0.0);
}

void DriftNet::init_params(Rng& rng) {
  auto fill = [&](const Layout::Block& b, double scale) {
    Map m = view(theta_, b);
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.normal();
  };
  for (std::size_t l = 0; l < layout_.trunk_w.size(); ++l) {
    fill(layout_.trunk_w[l],
         std::sqrt(2.0 / static_cast<double>(layout_.trunk_w[l].cols)));
    // biases stay zero
  }
  fill(layout_.head_x, 0.01);
  fill(layout_.head_y, 0.01);
  fill(layout_.role_embed, 1.0);
}

Vector DriftNet::time_embedding(double t) const {
  const int half = cfg_.time_dim / 2;
  Vector e(cfg_.time_dim);
  for (int k = 0; k < half; ++k) {
    const double freq =
        half > 1 ? std::pow(1000.0, static_cast<double>(k) / (half - 1)) : 1.0;
    e[2 * k] = std::sin(freq * t);
    e[2 * k + 1] = std::cos(freq * t);
  }
  return e;
}

namespace {

Vector assemble_input(const DriftNet& net, const Vector& x_state,
                      const Vector& y_state, double t, int role) {
  const auto& cfg = net.config();
  if (x_state.size() != cfg.d_x || y_state.size() != cfg.d_y)
    throw ShapeMismatch("state dimensions do not match net configuration");
  if (role != 0 && role != 1) throw ValidationError("role must be 0 or 1");
  Vector in(cfg.input_dim());
  in.head(cfg.d_x) = x_state;
  in.segment(cfg.d_x, cfg.d_y) = y_state;
  in.segment(cfg.d_x + cfg.d_y, cfg.time_dim) = net.time_embedding(t);
  in.tail(2) =
      view(net.params(), net.layout().role_embed).row(role).transpose();
  return in;
}

}  // namespace

Vector DriftNet::forward(const Vector& x_state, const Vector& y_state,
                         double t, int role) const {
  Vector h = assemble_input(*this, x_state, y_state, t, role);
  for (std::size_t l = 0; l < layout_.trunk_w.size(); ++l) {
    Vector z = view(theta_, layout_.trunk_w[l]) * h +
               view(theta_, layout_.trunk_b[l]).col(0);
    h = z.unaryExpr([](double v) { return gelu(v); });
  }
  if (role == 0)
    return view(theta_, layout_.head_x) * h + view(theta_, layout_.bias_x).col(0);
  return view(theta_, layout_.head_y) * h + view(theta_, layout_.bias_y).col(0);
}

double loss_x(const DriftNet& net, double t, const Vector& x_t,
              const Vector& y1, const Vector& v_x) {
  return (net.forward(x_t, y1, t, 0) - v_x).squaredNorm();
}

double loss_y(const DriftNet& net, double t, const Vector& x1,
              const Vector& y_t, const Vector& v_y) {
  return (net.forward(x1, y_t, t, 1) - v_y).squaredNorm();
}

double batch_loss(const DriftNet& net, const std::vector<BatchSample>& batch,
                  std::vector<double>* grad_out) {
  const auto& cfg = net.config();
  const auto& layout = net.layout();
  const auto& theta = net.params();
  const Index B = static_cast<Index>(batch.size());
  if (B == 0) throw ValidationError("batch must not be empty");
  const Index width = cfg.hidden_width;
  const int depth = cfg.depth;

  Matrix input(cfg.input_dim(), B);
  std::vector<Index> cols_x, cols_y;
  for (Index c = 0; c < B; ++c) {
    const auto& s = batch[c];
    if (s.target.size() != (s.role == 0 ? cfg.d_x : cfg.d_y))
      throw ShapeMismatch("target dimension does not match sample role");
    input.col(c) = assemble_input(net, s.x_state, s.y_state, s.t, s.role);
    (s.role == 0 ? cols_x : cols_y).push_back(c);
  }

  // Trunk forward, caching pre-activations for the backward pass.
  std::vector<Matrix> pre(depth), act(depth);
  const Matrix* below = &input;
  for (int l = 0; l < depth; ++l) {
    pre[l] = (view(theta, layout.trunk_w[l]) * (*below)).colwise() +
             view(theta, layout.trunk_b[l]).col(0);
    act[l] = pre[l].unaryExpr([](double v) { return gelu(v); });
    below = &act[l];
  }
  const Matrix& top = act[depth - 1];

  auto head_pass = [&](const std::vector<Index>& cols,
                       const DriftNet::Layout::Block& head,
                       const DriftNet::Layout::Block& bias, Index out_dim,
                       Matrix& residual) {
    residual.resize(out_dim, static_cast<Index>(cols.size()));
    double loss = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Index c = cols[k];
      Vector out = view(theta, head) * top.col(c) + view(theta, bias).col(0);
      residual.col(static_cast<Index>(k)) = out - batch[c].target;
      loss += residual.col(static_cast<Index>(k)).squaredNorm();
    }
    return loss;
  };

  Matrix res_x, res_y;
  double total = head_pass(cols_x, layout.head_x, layout.bias_x, cfg.d_x, res_x);
  total += head_pass(cols_y, layout.head_y, layout.bias_y, cfg.d_y, res_y);
  const double mean_loss = total / static_cast<double>(B);
  if (!grad_out) return mean_loss;

  grad_out->assign(theta.size(), 0.0);
  std::vector<double>& gbuf = *grad_out;

  Matrix d_top = Matrix::Zero(width, B);
  auto head_back = [&](const std::vector<Index>& cols, const Matrix& residual,
                       const DriftNet::Layout::Block& head,
                       const DriftNet::Layout::Block& bias) {
    Map g_head = view(gbuf, head);
    Map g_bias = view(gbuf, bias);
    ConstMap w_head = view(theta, head);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Index c = cols[k];
      const Vector d_out =
          (2.0 / static_cast<double>(B)) * residual.col(static_cast<Index>(k));
      g_head += d_out * top.col(c).transpose();
      g_bias.col(0) += d_out;
      d_top.col(c) += w_head.transpose() * d_out;
    }
  };
  head_back(cols_x, res_x, layout.head_x, layout.bias_x);
  head_back(cols_y, res_y, layout.head_y, layout.bias_y);

  Matrix d_act = std::move(d_top);
  for (int l = depth - 1; l >= 0; --l) {
    const Matrix d_pre =
        d_act.array() * pre[l].unaryExpr([](double v) { return gelu_prime(v); }).array();
    const Matrix& below_act = l == 0 ? input : act[l - 1];
    view(gbuf, layout.trunk_w[l]) += d_pre * below_act.transpose();
    view(gbuf, layout.trunk_b[l]).col(0) += d_pre.rowwise().sum();
    d_act = view(theta, layout.trunk_w[l]).transpose() * d_pre;
  }

  // Role embedding rows receive the input-gradient slice of their samples.
  Map g_role = view(gbuf, layout.role_embed);
  const Index role_off = cfg.d_x + cfg.d_y + cfg.time_dim;
  for (Index c = 0; c < B; ++c)
    g_role.row(batch[c].role) += d_act.col(c).segment(role_off, 2).transpose();

  return mean_loss;
}

AdamW::AdamW(std::size_t n_params, double lr, double weight_decay,
             double beta1, double beta2, double eps)
    : m_(n_params, 0.0),
      v_(n_params, 0.0),
      lr_(lr),
      wd_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {}

void AdamW::step(std::vector<double>& params,
                 const std::vector<double>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ShapeMismatch("optimizer state does not match parameter count");
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    params[i] -= lr_ * (m_hat / (std::sqrt(v_hat) + eps_) + wd_ * params[i]);
  }
}

TrainState make_train_state(const NetConfig& net_cfg, const TrainConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw ValidationError("alpha must lie in [0, 1]");
  if (cfg.batch < 1) throw ValidationError("batch size must be positive");
  TrainState st;
  st.net = DriftNet(net_cfg);
  Rng rng(cfg.seed);
  st.net.init_params(rng);
  st.opt = AdamW(st.net.num_params(), cfg.lr, cfg.weight_decay);
  st.cfg = cfg;
  return st;
}

std::vector<EpochLog> train(TrainState& state, planops::PlanSampler& sampler,
                            const InterpolantSchedule& schedule,
                            const Matrix& embeddings) {
  const auto& cfg = state.cfg;
  const auto& net_cfg = state.net.config();
  if (embeddings.cols() != net_cfg.d_y)
    throw ShapeMismatch("embedding dimension does not match net d_y");
  const Index n = sampler.plan().size();
  if (embeddings.rows() != n)
    throw ShapeMismatch("embedding count does not match plan size");

  const int steps = cfg.steps_per_epoch > 0
                        ? cfg.steps_per_epoch
                        : static_cast<int>((n + cfg.batch - 1) / cfg.batch);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<EpochLog> logs;
  std::vector<double> grads;
  std::vector<BatchSample> batch(cfg.batch);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t_start = std::chrono::steady_clock::now();
    double sum_x = 0.0, sum_y = 0.0;
    long count_x = 0, count_y = 0;
    for (int s = 0; s < steps; ++s) {
      for (int b = 0; b < cfg.batch; ++b) {
        const auto pair = sampler.sample_pair();
        const int role = rng.bernoulli(cfg.alpha) ? 1 : 0;
        const double t = rng.uniform();
        const Vector y1 = embeddings.row(pair.y_index).transpose();
        BatchSample& sample = batch[b];
        sample.role = role;
        sample.t = t;
        if (role == 0) {
          const Vector x0 = rng.normal_vector(net_cfg.d_x);
          auto [xt, v] = interpolate(schedule, x0, pair.x, t);
          sample.x_state = std::move(xt);
          sample.y_state = y1;
          sample.target = std::move(v);
        } else {
          const Vector y0 = rng.normal_vector(net_cfg.d_y);
          auto [yt, v] = interpolate(schedule, y0, y1, t);
          sample.x_state = pair.x;
          sample.y_state = std::move(yt);
          sample.target = std::move(v);
        }
      }
      batch_loss(state.net, batch, &grads);
      // Per-role epoch means use the per-sample (unaveraged) losses.
      for (const auto& sample : batch) {
        const double l = sample.role == 0
                             ? loss_x(state.net, sample.t, sample.x_state,
                                      sample.y_state, sample.target)
                             : loss_y(state.net, sample.t, sample.x_state,
                                      sample.y_state, sample.target);
        if (sample.role == 0) {
          sum_x += l;
          ++count_x;
        } else {
          sum_y += l;
          ++count_y;
        }
      }
      state.opt.step(state.net.params(), grads);
      ++state.step_count;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    logs.push_back({epoch, count_x ? sum_x / count_x : 0.0,
                    count_y ? sum_y / count_y : 0.0, secs});
  }
  return logs;
}

namespace {
constexpr char kMagic[4] = {'C', 'P', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const DriftNet& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  const auto& cfg = net.config();
  write_u32(out, static_cast<std::uint32_t>(cfg.d_x));
  write_u32(out, static_cast<std::uint32_t>(cfg.d_y));
  write_u32(out, static_cast<std::uint32_t>(cfg.hidden_width));
  write_u32(out, static_cast<std::uint32_t>(cfg.depth));
  write_u32(out, static_cast<std::uint32_t>(cfg.time_dim));
  write_u32(out, static_cast<std::uint32_t>(cfg.schedule_id));
  const std::uint64_t count = net.num_params();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(net.params().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

DriftNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError("bad checkpoint magic", 1, 1);
  if (read_u32(in) != kVersion)
    throw ParseError("unsupported checkpoint version", 1, 5);
  NetConfig cfg;
  cfg.d_x = static_cast<int>(read_u32(in));
  cfg.d_y = static_cast<int>(read_u32(in));
  cfg.hidden_width = static_cast<int>(read_u32(in));
  cfg.depth = static_cast<int>(read_u32(in));
  cfg.time_dim = static_cast<int>(read_u32(in));
  cfg.schedule_id = static_cast<int>(read_u32(in));
  DriftNet net(cfg);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || count != net.num_params())
    throw ParseError("checkpoint parameter count mismatch", 1, 1);
  in.read(reinterpret_cast<char*>(net.params().data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw ParseError("truncated checkpoint", 1, 1);
  return net;
}

}  // namespace cpfm::dcfm
