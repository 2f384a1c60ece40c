#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sal/activation.hpp"
#include "sal/bench_data.hpp"
#include "sal/matrix.hpp"
#include "sal/rng.hpp"

namespace sal {

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  Activation activation;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected network; hidden layers use their own activation and the
/// output layer is the identity.
struct MlpParams {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<DenseLayer> layers;

  void validate() const;
  std::vector<std::size_t> hidden_widths() const;
  /// Width of the last hidden layer (input_dim when there is none).
  std::size_t feature_width() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct MlpShape {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;
  std::vector<Activation> hidden_activations;
  std::size_t output_dim = 1;

  void validate() const;
  /// "50x6" for uniform widths, otherwise widths joined with '-'.
  std::string structure() const;
};

/// Weights ~ N(0, 2 / fan_in), biases 0.
MlpParams he_init(const MlpShape& shape, SplitMix64& rng);
MlpParams zero_init(const MlpShape& shape);

struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l; inputs[0] is the batch
  std::vector<Matrix> pre;     // pre-activations of layer l
};

/// Batch forward pass, rows are samples.
Matrix mlp_forward(const MlpParams& params, const Matrix& x, ForwardCache* cache = nullptr);
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x);
/// Output of the last hidden layer (the batch itself when there is none).
Matrix mlp_hidden_output(const MlpParams& params, const Matrix& x);

struct MlpGrads {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
};

/// Reverse pass for dLoss/dOutput = `output_grad` (rows are samples); the
/// returned gradients are summed over the batch.
MlpGrads mlp_backward(const MlpParams& params, const ForwardCache& cache, const Matrix& output_grad);

struct AdamState {
  std::int64_t step = 0;
  MlpGrads m;
  MlpGrads v;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  static AdamState for_params(const MlpParams& params, double alpha);
};

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

/// Sum over samples of ||prediction - target||^2.
double squared_loss(const Matrix& prediction, const Matrix& targets);

struct SsgConfig {
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;  // one per hidden layer
  double alpha = 1e-3;
  int epochs = 5000;
  double epsilon = 1e-7;
  std::uint64_t seed = 1;
  bool zero_init = false;
  /// Epoch counts (steps taken) at which a report row is written; the final
  /// epoch always gets a row.
  std::vector<int> checkpoints;
};

struct SsgRecord {
  std::string structure;
  double alpha = 0;
  double epsilon = 0;
  int epoch = 0;
  double train_time_s = 0;
  double rse_train = 0;
  double rse_test = 0;
};

struct SsgReport {
  std::vector<SsgRecord> rows;
  double total_time_s = 0;
  int epochs_run = 0;
  std::string stop_reason;
  /// rse(train) of the parameters after e steps, e = 0..epochs_run.
  std::vector<double> rse_history;
  /// Training seconds elapsed when the parameters after e steps existed.
  std::vector<double> time_history;
  std::vector<std::string> notes;
};

struct SsgResult {
  MlpParams params;
  SsgReport report;
};

MlpShape ssg_shape(const SsgConfig& cfg, std::size_t input_dim, std::size_t output_dim);

/// Full-batch Adam: one epoch is one gradient step on the whole training set.
/// Stops at cfg.epochs or when the relative loss change drops below epsilon.
SsgResult train_ssg(const Dataset& train, const Dataset* test, const SsgConfig& cfg);

}  // namespace sal
