#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfcdelay/mixture.hpp"
#include "sfcdelay/netsim.hpp"

// Mixture density network: ReLU MLP whose 3K outputs parameterize a
// K-component Gaussian mixture (softmax weights, exponential variances,
// linear means). Trained by negative log-likelihood with Adam.
namespace sfcdelay::mdn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Architecture {
  int input_dim = 1;
  std::vector<int> hidden{64, 32, 32};
  int kernels = 3;

  int output_dim() const { return 3 * kernels; }
  void validate() const;
  bool operator==(const Architecture&) const = default;
};

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Affine standardization of inputs and targets. Targets are modelled in
/// standardized units; mixtures are mapped back on output.
struct Normalization {
  Vector feature_mean;
  Vector feature_std;
  double target_shift = 0.0;
  double target_scale = 1.0;
};

/// Training examples, one column per sample.
struct Batch {
  Matrix features;  // input_dim x n
  Vector targets;   // n

  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
  static Batch from_records(std::span<const netsim::CustomerRecord> records);
  static Batch from_rows(const std::vector<std::vector<double>>& features,
                         const std::vector<double>& targets);
  Batch subset(std::span<const std::size_t> columns) const;
};

/// Raw network heads for a batch, in model (standardized) units.
struct HeadOutputs {
  Matrix logits;        // K x n
  Matrix log_variance;  // K x n, before the floor
  Matrix means;         // K x n
};

class MdnModel {
 public:
  MdnModel() = default;
  /// All-zero weights and biases, identity normalization.
  explicit MdnModel(Architecture arch, double variance_floor = 1e-6);

  static MdnModel initialized(Architecture arch, std::uint64_t seed, double variance_floor = 1e-6);

  const Architecture& architecture() const { return arch_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  const Normalization& normalization() const { return norm_; }
  void set_normalization(Normalization norm);
  double variance_floor() const { return variance_floor_; }

  GaussianMixture forward(std::span<const double> b) const;
  GaussianMixture forward(std::span<const int> b) const;
  std::vector<GaussianMixture> forward_batch(const Matrix& features) const;
  HeadOutputs heads(const Matrix& features) const;

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  bool operator==(const MdnModel& o) const;

 private:
  Architecture arch_;
  std::vector<Layer> layers_;
  Normalization norm_;
  double variance_floor_ = 1e-6;
};

/// -sum_j ln p(y_j | x_j), in the targets' own units.
double nll_loss(const MdnModel& model, const Batch& batch);

struct Gradient {
  std::vector<Layer> layers;
  double loss = 0.0;

  std::vector<double> flatten() const;
};

/// Exact gradient of nll_loss with respect to every weight and bias.
Gradient backward(const MdnModel& model, const Batch& batch);

/// d loss / d output-unit, per sample: rows are the 3K raw outputs
/// (logits, log-variances, means). Exposed for identity checks.
Matrix output_gradient(const MdnModel& model, const Batch& batch);

struct TrainConfig {
  int epochs = 500;
  int batch_size = 512;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  double variance_floor = 1e-6;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double holdout_fraction = 0.1;
  bool standardize_targets = true;

  void validate() const;
};

struct EpochReport {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-sample NLL over the epoch's batches
};

struct TrainResult {
  MdnModel model;
  std::vector<EpochReport> trace;
  Batch holdout;
  double holdout_nll = 0.0;  // mean per sample; NaN if no holdout
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochReport&)>;

TrainResult train(const Batch& dataset, const Architecture& arch, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

void save_model(const MdnModel& model, const std::filesystem::path& path);
MdnModel load_model(const std::filesystem::path& path);
std::string serialize_model(const MdnModel& model);
MdnModel deserialize_model(const std::string& text);

void write_loss_trace(std::span<const EpochReport> trace, const std::filesystem::path& path);

}  // namespace sfcdelay::mdn
