#include "sal/mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sal/error.hpp"
#include "sal/kernels.hpp"

namespace sal {

void MlpParams::validate() const {
  if (layers.empty()) throw ShapeError("mlp: no layers");
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& L = layers[l];
    if (L.weight.cols() != in)
      throw ShapeError("mlp: layer " + std::to_string(l) + " expects " + std::to_string(L.weight.cols()) +
                       " inputs, previous width is " + std::to_string(in));
    if (L.bias.size() != L.weight.rows()) throw ShapeError("mlp: layer " + std::to_string(l) + " bias size mismatch");
    in = L.weight.rows();
  }
  if (in != output_dim) throw ShapeError("mlp: output layer width does not match output_dim");
  if (layers.back().activation.type() != ActivationType::Identity)
    throw ShapeError("mlp: output layer activation must be the identity");
}

std::vector<std::size_t> MlpParams::hidden_widths() const {
  std::vector<std::size_t> w;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) w.push_back(layers[l].weight.rows());
  return w;
}

std::size_t MlpParams::feature_width() const {
  return layers.size() >= 2 ? layers[layers.size() - 2].weight.rows() : input_dim;
}

void MlpShape::validate() const {
  if (hidden.size() != hidden_activations.size())
    throw ShapeError("mlp shape: " + std::to_string(hidden.size()) + " hidden widths but " +
                     std::to_string(hidden_activations.size()) + " activations");
  if (input_dim == 0 || output_dim == 0) throw ShapeError("mlp shape: dimensions must be positive");
  for (std::size_t w : hidden)
    if (w == 0) throw ShapeError("mlp shape: hidden width must be positive");
}

std::string MlpShape::structure() const {
  if (hidden.empty()) return "0";
  const bool uniform = std::all_of(hidden.begin(), hidden.end(), [&](std::size_t w) { return w == hidden.front(); });
  if (uniform) return std::to_string(hidden.front()) + "x" + std::to_string(hidden.size());
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "-" : "") + std::to_string(hidden[i]);
  return s;
}

namespace {

MlpParams allocate(const MlpShape& shape) {
  shape.validate();
  MlpParams p;
  p.input_dim = shape.input_dim;
  p.output_dim = shape.output_dim;
  std::size_t in = shape.input_dim;
  for (std::size_t l = 0; l <= shape.hidden.size(); ++l) {
    const bool output = l == shape.hidden.size();
    const std::size_t out = output ? shape.output_dim : shape.hidden[l];
    p.layers.push_back({Matrix(out, in), std::vector<double>(out, 0.0),
                        output ? Activation::identity() : shape.hidden_activations[l]});
    in = out;
  }
  return p;
}

}  // namespace

MlpParams he_init(const MlpShape& shape, SplitMix64& rng) {
  MlpParams p = allocate(shape);
  for (DenseLayer& L : p.layers) {
    const double sd = std::sqrt(2.0 / static_cast<double>(L.weight.cols()));
    for (double& w : L.weight.values()) w = sd * rng.next_normal();
  }
  return p;
}

MlpParams zero_init(const MlpShape& shape) { return allocate(shape); }

Matrix mlp_forward(const MlpParams& params, const Matrix& x, ForwardCache* cache) {
  if (x.cols() != params.input_dim) throw ShapeError("mlp_forward: input width does not match input_dim");
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix h = x;
  for (const DenseLayer& L : params.layers) {
    Matrix z = matmul_nt(h, L.weight);
    for (std::size_t r = 0; r < z.rows(); ++r) kernels::axpy(1.0, L.bias.data(), z.data() + r * z.cols(), z.cols());
    Matrix a = z;
    L.activation.apply(a.values(), a.values());
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(std::move(z));
    }
    h = std::move(a);
  }
  return h;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x) {
  const Matrix out = mlp_forward(params, Matrix::from_rows(1, x.size(), {x.begin(), x.end()}));
  return {out.row(0).begin(), out.row(0).end()};
}

Matrix mlp_hidden_output(const MlpParams& params, const Matrix& x) {
  if (x.cols() != params.input_dim) throw ShapeError("mlp_hidden_output: input width does not match input_dim");
  Matrix h = x;
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
    const DenseLayer& L = params.layers[l];
    Matrix z = matmul_nt(h, L.weight);
    for (std::size_t r = 0; r < z.rows(); ++r) kernels::axpy(1.0, L.bias.data(), z.data() + r * z.cols(), z.cols());
    L.activation.apply(z.values(), z.values());
    h = std::move(z);
  }
  return h;
}

MlpGrads mlp_backward(const MlpParams& params, const ForwardCache& cache, const Matrix& output_grad) {
  const std::size_t nl = params.layers.size();
  if (cache.pre.size() != nl || cache.inputs.size() != nl) throw ShapeError("mlp_backward: cache does not match network");
  if (output_grad.rows() != cache.pre.back().rows() || output_grad.cols() != params.output_dim)
    throw ShapeError("mlp_backward: output gradient shape mismatch");
  MlpGrads g;
  g.weight.resize(nl);
  g.bias.resize(nl);
  Matrix delta = output_grad;  // dL/d(post-activation) of the current layer
  for (std::size_t l = nl; l-- > 0;) {
    const DenseLayer& L = params.layers[l];
    const Matrix& z = cache.pre[l];
    if (L.activation.type() != ActivationType::Identity)
      for (std::size_t i = 0; i < delta.size(); ++i) delta.data()[i] *= L.activation.derivative(z.data()[i]);
    g.weight[l] = matmul_tn(delta, cache.inputs[l]);
    g.bias[l].assign(L.bias.size(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r)
      kernels::axpy(1.0, delta.data() + r * delta.cols(), g.bias[l].data(), delta.cols());
    if (l > 0) delta = matmul(delta, L.weight);
  }
  return g;
}

AdamState AdamState::for_params(const MlpParams& params, double alpha) {
  AdamState s;
  s.alpha = alpha;
  for (const DenseLayer& L : params.layers) {
    s.m.weight.emplace_back(L.weight.rows(), L.weight.cols());
    s.v.weight.emplace_back(L.weight.rows(), L.weight.cols());
    s.m.bias.emplace_back(L.bias.size(), 0.0);
    s.v.bias.emplace_back(L.bias.size(), 0.0);
  }
  return s;
}

namespace {

void adam_update(std::span<double> theta, std::span<const double> g, std::span<double> m, std::span<double> v,
                 const AdamState& s, double bc1, double bc2) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    theta[i] -= s.alpha * mhat / (std::sqrt(vhat) + s.eps_hat);
  }
}

}  // namespace

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  if (grads.weight.size() != params.layers.size() || state.m.weight.size() != params.layers.size())
    throw ShapeError("adam_step: gradient/state layout does not match parameters");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    DenseLayer& L = params.layers[l];
    if (grads.weight[l].rows() != L.weight.rows() || grads.weight[l].cols() != L.weight.cols() ||
        grads.bias[l].size() != L.bias.size())
      throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(l));
    adam_update(L.weight.values(), grads.weight[l].values(), state.m.weight[l].values(), state.v.weight[l].values(),
                state, bc1, bc2);
    adam_update(L.bias, grads.bias[l], state.m.bias[l], state.v.bias[l], state, bc1, bc2);
  }
}

double squared_loss(const Matrix& prediction, const Matrix& targets) {
  if (prediction.rows() != targets.rows() || prediction.cols() != targets.cols())
    throw ShapeError("squared_loss: shape mismatch");
  return kernels::sq_dist(prediction.data(), targets.data(), prediction.size());
}

MlpShape ssg_shape(const SsgConfig& cfg, std::size_t input_dim, std::size_t output_dim) {
  MlpShape s;
  s.input_dim = input_dim;
  s.output_dim = output_dim;
  s.hidden = cfg.widths;
  s.hidden_activations = cfg.activations;
  s.validate();
  return s;
}

SsgResult train_ssg(const Dataset& train, const Dataset* test, const SsgConfig& cfg) {
  using clock = std::chrono::steady_clock;
  if (train.size() == 0) throw Error("train_ssg: empty training set");
  if (cfg.epochs < 0) throw Error("train_ssg: epochs must be nonnegative");
  const MlpShape shape = ssg_shape(cfg, train.input_dim(), train.output_dim());
  SplitMix64 rng(cfg.seed);
  SsgResult res;
  res.params = cfg.zero_init ? zero_init(shape) : he_init(shape, rng);
  SsgReport& rep = res.report;
  const double denom = frobenius_sq(train.targets);
  if (!(denom > 0.0)) throw Error("train_ssg: all-zero targets, rse is undefined");
  const double test_denom = test ? frobenius_sq(test->targets) : 0.0;
  const std::string structure = shape.structure();

  std::vector<int> checkpoints = cfg.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());

  AdamState adam = AdamState::for_params(res.params, cfg.alpha);
  double elapsed = 0.0;
  double prev_loss = 0.0;
  ForwardCache cache;

  auto record = [&](int epoch, double loss) {
    SsgRecord row{structure, cfg.alpha, cfg.epsilon, epoch, elapsed, loss / denom, 0.0};
    if (test && test_denom > 0.0) row.rse_test = squared_loss(mlp_forward(res.params, test->inputs), test->targets) / test_denom;
    rep.rows.push_back(row);
  };

  rep.stop_reason = "max_epochs";
  for (int epoch = 0;; ++epoch) {
    const auto t0 = clock::now();
    const Matrix pred = mlp_forward(res.params, train.inputs, &cache);
    const double loss = squared_loss(pred, train.targets);
    elapsed += std::chrono::duration<double>(clock::now() - t0).count();
    if (!std::isfinite(loss)) throw NumericError("train_ssg: non-finite loss at epoch " + std::to_string(epoch));
    rep.rse_history.push_back(loss / denom);
    rep.time_history.push_back(elapsed);

    const bool converged = epoch > 0 && std::abs(loss - prev_loss) / std::max(std::abs(prev_loss), 1e-30) < cfg.epsilon;
    const bool last = epoch == cfg.epochs || converged;
    if (last || std::binary_search(checkpoints.begin(), checkpoints.end(), epoch)) record(epoch, loss);
    if (last) {
      rep.epochs_run = epoch;
      if (converged) rep.stop_reason = "epsilon";
      break;
    }
    prev_loss = loss;

    const auto t1 = clock::now();
    Matrix grad = pred;
    grad -= train.targets;
    kernels::scale(2.0, grad.data(), grad.size());
    const MlpGrads g = mlp_backward(res.params, cache, grad);
    adam_step(res.params, g, adam);
    elapsed += std::chrono::duration<double>(clock::now() - t1).count();
  }
  rep.total_time_s = elapsed;
  rep.notes.push_back("full-batch Adam; epoch = one gradient step on all training samples");
  rep.notes.push_back("test rse is reported only and never used for stopping");
  return res;
}

}  // namespace sal
