#include "sfcdelay/mdn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace sfcdelay::mdn {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l; inputs[0] is standardized
  Matrix output;               // 3K x n raw outputs
};

ForwardCache run_network(const MdnModel& model, const Matrix& features) {
  const auto& arch = model.architecture();
  if (features.rows() != arch.input_dim) {
    throw std::invalid_argument("mdn: feature dimension " + std::to_string(features.rows()) +
                                " does not match model input " + std::to_string(arch.input_dim));
  }
  const auto& norm = model.normalization();
  ForwardCache cache;
  const auto& layers = model.layers();
  cache.inputs.reserve(layers.size());
  cache.inputs.push_back(
      ((features.colwise() - norm.feature_mean).array().colwise() / norm.feature_std.array())
          .matrix());
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix z = layers[l].weight * cache.inputs.back();
    z.colwise() += layers[l].bias;
    cache.inputs.push_back(z.cwiseMax(0.0));
  }
  cache.output = layers.back().weight * cache.inputs.back();
  cache.output.colwise() += layers.back().bias;
  return cache;
}

// Variance head: exp of the raw output, capped so extreme weights still give
// a finite variance, plus the floor.
constexpr double kMaxLogVariance = 300.0;

double head_exp(double s) { return std::exp(std::min(s, kMaxLogVariance)); }

// Per-sample NLL in standardized target units and, optionally, its gradient
// with respect to the raw outputs.
double mixture_nll(const Matrix& output, const Vector& targets, int kernels, double floor,
                   double shift, double scale, Matrix* d_output) {
  const Eigen::Index n = output.cols();
  const int K = kernels;
  if (d_output) d_output->resize(output.rows(), n);
  std::vector<double> log_terms(K), variances(K), log_pi(K);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double y = (targets[j] - shift) / scale;
    double zmax = output(0, j);
    for (int k = 1; k < K; ++k) zmax = std::max(zmax, output(k, j));
    double zsum = 0.0;
    for (int k = 0; k < K; ++k) zsum += std::exp(output(k, j) - zmax);
    const double log_z = zmax + std::log(zsum);

    double peak = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      log_pi[k] = output(k, j) - log_z;
      variances[k] = head_exp(output(K + k, j)) + floor;
      const double r = y - output(2 * K + k, j);
      log_terms[k] = log_pi[k] - kHalfLog2Pi - 0.5 * std::log(variances[k]) -
                     0.5 * r * r / variances[k];
      peak = std::max(peak, log_terms[k]);
    }
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += std::exp(log_terms[k] - peak);
    const double log_p = peak + std::log(s);
    total += -log_p;

    if (d_output) {
      for (int k = 0; k < K; ++k) {
        const double posterior = std::exp(log_terms[k] - log_p);
        const double r = y - output(2 * K + k, j);
        const double v = variances[k];
        (*d_output)(k, j) = std::exp(log_pi[k]) - posterior;
        const double s_k = output(K + k, j);
        (*d_output)(K + k, j) = s_k < kMaxLogVariance
                                    ? 0.5 * posterior / v * (1.0 - r * r / v) * std::exp(s_k)
                                    : 0.0;
        (*d_output)(2 * K + k, j) = -posterior * r / v;
      }
    }
  }
  return total + static_cast<double>(n) * std::log(scale);
}

Gradient backprop(const MdnModel& model, const ForwardCache& cache, const Matrix& d_output,
                  double loss) {
  const auto& layers = model.layers();
  Gradient g;
  g.loss = loss;
  g.layers.resize(layers.size());
  Matrix delta = d_output;
  for (std::size_t l = layers.size(); l-- > 0;) {
    g.layers[l].weight = delta * cache.inputs[l].transpose();
    g.layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      Matrix upstream = layers[l].weight.transpose() * delta;
      delta = (cache.inputs[l].array() > 0.0).select(upstream, 0.0);
    }
  }
  return g;
}

GaussianMixture to_mixture(const MdnModel& model, const Matrix& output, Eigen::Index j) {
  const int K = model.architecture().kernels;
  const auto& norm = model.normalization();
  double zmax = output(0, j);
  for (int k = 1; k < K; ++k) zmax = std::max(zmax, output(k, j));
  std::vector<double> w(K);
  double zsum = 0.0;
  for (int k = 0; k < K; ++k) zsum += (w[k] = std::exp(output(k, j) - zmax));
  std::vector<MixtureComponent> comps(K);
  const double scale2 = norm.target_scale * norm.target_scale;
  for (int k = 0; k < K; ++k) {
    comps[k].weight = w[k] / zsum;
    comps[k].variance = scale2 * (head_exp(output(K + k, j)) + model.variance_floor());
    comps[k].mean = norm.target_shift + norm.target_scale * output(2 * K + k, j);
  }
  return GaussianMixture(std::move(comps));
}

}  // namespace

// ---------------------------------------------------------------------------

void Architecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("mdn: input_dim must be >= 1");
  if (kernels < 1) throw std::invalid_argument("mdn: kernels must be >= 1");
  for (int w : hidden) {
    if (w < 1) throw std::invalid_argument("mdn: hidden widths must be >= 1");
  }
}

Batch Batch::from_records(std::span<const netsim::CustomerRecord> records) {
  Batch b;
  const Eigen::Index d = records.empty() ? 0 : static_cast<Eigen::Index>(records[0].b.size());
  b.features.resize(d, static_cast<Eigen::Index>(records.size()));
  b.targets.resize(static_cast<Eigen::Index>(records.size()));
  for (std::size_t j = 0; j < records.size(); ++j) {
    if (static_cast<Eigen::Index>(records[j].b.size()) != d) {
      throw std::invalid_argument("mdn: records have differing queue-vector lengths");
    }
    for (Eigen::Index i = 0; i < d; ++i) b.features(i, j) = records[j].b[i];
    b.targets[j] = records[j].delay;
  }
  return b;
}

Batch Batch::from_rows(const std::vector<std::vector<double>>& features,
                       const std::vector<double>& targets) {
  if (features.size() != targets.size()) {
    throw std::invalid_argument("mdn: feature and target counts differ");
  }
  Batch b;
  const Eigen::Index d = features.empty() ? 0 : static_cast<Eigen::Index>(features[0].size());
  b.features.resize(d, static_cast<Eigen::Index>(features.size()));
  b.targets = Eigen::Map<const Vector>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (static_cast<Eigen::Index>(features[j].size()) != d) {
      throw std::invalid_argument("mdn: feature rows have differing lengths");
    }
    for (Eigen::Index i = 0; i < d; ++i) b.features(i, j) = features[j][i];
  }
  return b;
}

Batch Batch::subset(std::span<const std::size_t> columns) const {
  Batch b;
  b.features.resize(features.rows(), static_cast<Eigen::Index>(columns.size()));
  b.targets.resize(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    b.features.col(j) = features.col(columns[j]);
    b.targets[j] = targets[columns[j]];
  }
  return b;
}

MdnModel::MdnModel(Architecture arch, double variance_floor)
    : arch_(std::move(arch)), variance_floor_(variance_floor) {
  arch_.validate();
  if (!(variance_floor_ > 0.0)) throw std::invalid_argument("mdn: variance floor must be > 0");
  int in = arch_.input_dim;
  for (int w : arch_.hidden) {
    layers_.push_back({Matrix::Zero(w, in), Vector::Zero(w)});
    in = w;
  }
  layers_.push_back({Matrix::Zero(arch_.output_dim(), in), Vector::Zero(arch_.output_dim())});
  norm_.feature_mean = Vector::Zero(arch_.input_dim);
  norm_.feature_std = Vector::Ones(arch_.input_dim);
}

MdnModel MdnModel::initialized(Architecture arch, std::uint64_t seed, double variance_floor) {
  MdnModel m(std::move(arch), variance_floor);
  netsim::Rng rng(seed);
  for (std::size_t l = 0; l < m.layers_.size(); ++l) {
    auto& layer = m.layers_[l];
    const double fan_in = static_cast<double>(layer.weight.cols());
    const bool relu_follows = l + 1 < m.layers_.size();
    const double limit = std::sqrt((relu_follows ? 6.0 : 1.0) / fan_in);
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = u(rng);
    }
  }
  return m;
}

void MdnModel::set_normalization(Normalization norm) {
  if (norm.feature_mean.size() != arch_.input_dim || norm.feature_std.size() != arch_.input_dim) {
    throw std::invalid_argument("mdn: normalization length mismatch");
  }
  if ((norm.feature_std.array() <= 0.0).any() || !(norm.target_scale > 0.0)) {
    throw std::invalid_argument("mdn: normalization scales must be positive");
  }
  norm_ = std::move(norm);
}

HeadOutputs MdnModel::heads(const Matrix& features) const {
  const auto cache = run_network(*this, features);
  const int K = arch_.kernels;
  return {cache.output.topRows(K), cache.output.middleRows(K, K), cache.output.bottomRows(K)};
}

GaussianMixture MdnModel::forward(std::span<const double> b) const {
  if (static_cast<int>(b.size()) != arch_.input_dim) {
    throw std::invalid_argument("mdn: input has " + std::to_string(b.size()) +
                                " features, model expects " + std::to_string(arch_.input_dim));
  }
  Matrix x(arch_.input_dim, 1);
  for (int i = 0; i < arch_.input_dim; ++i) x(i, 0) = b[i];
  return to_mixture(*this, run_network(*this, x).output, 0);
}

GaussianMixture MdnModel::forward(std::span<const int> b) const {
  std::vector<double> v(b.begin(), b.end());
  return forward(std::span<const double>(v));
}

std::vector<GaussianMixture> MdnModel::forward_batch(const Matrix& features) const {
  const auto cache = run_network(*this, features);
  std::vector<GaussianMixture> out;
  out.reserve(static_cast<std::size_t>(features.cols()));
  for (Eigen::Index j = 0; j < features.cols(); ++j) out.push_back(to_mixture(*this, cache.output, j));
  return out;
}

std::size_t MdnModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> MdnModel::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

void MdnModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("mdn: parameter vector has wrong length");
  }
  std::size_t at = 0;
  for (auto& l : layers_) {
    std::copy_n(flat.begin() + at, l.weight.size(), l.weight.data());
    at += l.weight.size();
    std::copy_n(flat.begin() + at, l.bias.size(), l.bias.data());
    at += l.bias.size();
  }
}

bool MdnModel::operator==(const MdnModel& o) const {
  if (!(arch_ == o.arch_) || variance_floor_ != o.variance_floor_) return false;
  if (norm_.feature_mean != o.norm_.feature_mean || norm_.feature_std != o.norm_.feature_std ||
      norm_.target_shift != o.norm_.target_shift || norm_.target_scale != o.norm_.target_scale) {
    return false;
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weight != o.layers_[l].weight || layers_[l].bias != o.layers_[l].bias) {
      return false;
    }
  }
  return true;
}

std::vector<double> Gradient::flatten() const {
  std::vector<double> flat;
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

// ---------------------------------------------------------------------------

double nll_loss(const MdnModel& model, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("mdn: empty batch");
  const auto cache = run_network(model, batch.features);
  const auto& norm = model.normalization();
  return mixture_nll(cache.output, batch.targets, model.architecture().kernels,
                     model.variance_floor(), norm.target_shift, norm.target_scale, nullptr);
}

Matrix output_gradient(const MdnModel& model, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("mdn: empty batch");
  const auto cache = run_network(model, batch.features);
  const auto& norm = model.normalization();
  Matrix d;
  mixture_nll(cache.output, batch.targets, model.architecture().kernels, model.variance_floor(),
              norm.target_shift, norm.target_scale, &d);
  return d;
}

Gradient backward(const MdnModel& model, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("mdn: empty batch");
  const auto cache = run_network(model, batch.features);
  const auto& norm = model.normalization();
  Matrix d;
  const double loss = mixture_nll(cache.output, batch.targets, model.architecture().kernels,
                                  model.variance_floor(), norm.target_shift, norm.target_scale, &d);
  return backprop(model, cache, d, loss);
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) {
    throw std::invalid_argument("train: epochs and batch size must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
  if (!(variance_floor > 0.0)) throw std::invalid_argument("train: variance floor must be > 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw std::invalid_argument("train: holdout fraction must lie in [0,1)");
  }
}

namespace {

Normalization fit_normalization(const Batch& data, bool standardize_targets) {
  Normalization norm;
  const double n = static_cast<double>(data.size());
  norm.feature_mean = data.features.rowwise().mean();
  const Matrix centred = data.features.colwise() - norm.feature_mean;
  norm.feature_std = (centred.array().square().rowwise().sum() / n).sqrt().matrix();
  for (Eigen::Index i = 0; i < norm.feature_std.size(); ++i) {
    if (!(norm.feature_std[i] > 1e-12)) norm.feature_std[i] = 1.0;
  }
  if (standardize_targets) {
    norm.target_shift = data.targets.mean();
    const double sd =
        std::sqrt((data.targets.array() - norm.target_shift).square().sum() / n);
    norm.target_scale = sd > 1e-12 ? sd : 1.0;
  }
  return norm;
}

class Adam {
 public:
  Adam(const MdnModel& model, const TrainConfig& cfg) : cfg_(cfg) {
    for (const auto& l : model.layers()) {
      m_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
      v_.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    }
  }

  void step(MdnModel& model, const Gradient& g, double scale) {
    ++t_;
    const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
    const double lr = cfg_.learning_rate;
    const double eps = cfg_.adam_epsilon;
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m = b1 * m + (1.0 - b1) * (scale * grad);
      v = b2 * v + (1.0 - b2) * (scale * grad).cwiseAbs2();
      param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weight, m_[l].weight, v_[l].weight, g.layers[l].weight);
      update(layers[l].bias, m_[l].bias, v_[l].bias, g.layers[l].bias);
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<Layer> m_, v_;
  int t_ = 0;
};

}  // namespace

TrainResult train(const Batch& dataset, const Architecture& arch, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  arch.validate();
  if (dataset.size() == 0) throw std::invalid_argument("train: dataset is empty");
  if (dataset.features.rows() != arch.input_dim) {
    throw std::invalid_argument("train: dataset has " + std::to_string(dataset.features.rows()) +
                                " features, architecture expects " +
                                std::to_string(arch.input_dim));
  }

  netsim::Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_hold = static_cast<std::size_t>(config.holdout_fraction * dataset.size());
  const std::span<const std::size_t> hold_idx(order.data(), n_hold);
  std::vector<std::size_t> train_idx(order.begin() + n_hold, order.end());
  std::sort(train_idx.begin(), train_idx.end());
  if (train_idx.empty()) throw std::invalid_argument("train: no samples left after holdout split");

  TrainResult result;
  result.holdout = dataset.subset(hold_idx);
  const Batch train_set = dataset.subset(train_idx);

  result.model = MdnModel::initialized(arch, rng(), config.variance_floor);
  result.model.set_normalization(fit_normalization(train_set, config.standardize_targets));

  Adam adam(result.model, config);
  std::vector<std::size_t> perm(train_set.size());
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double epoch_loss = 0.0;
    int batch_no = 0;
    for (std::size_t start = 0; start < perm.size(); start += bs, ++batch_no) {
      const std::size_t len = std::min(bs, perm.size() - start);
      const Batch batch = train_set.subset(std::span<const std::size_t>(perm).subspan(start, len));
      const Gradient g = backward(result.model, batch);
      if (!std::isfinite(g.loss)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_no));
      }
      epoch_loss += g.loss;
      adam.step(result.model, g, 1.0 / static_cast<double>(len));
    }
    EpochReport report{epoch, epoch_loss / static_cast<double>(train_set.size())};
    result.trace.push_back(report);
    if (on_epoch) on_epoch(report);
  }

  result.holdout_nll = result.holdout.size() > 0
                           ? nll_loss(result.model, result.holdout) / result.holdout.size()
                           : std::numeric_limits<double>::quiet_NaN();
  return result;
}

// ---------------------------------------------------------------------------
// Model files: line-oriented sections with explicit shapes.
//
//   sfcdelay-mdn 1
//   [architecture]
//   input_dim 3
//   hidden 64 32 32
//   kernels 3
//   variance_floor 1e-06
//   [normalization]
//   feature_mean ...
//   feature_std ...
//   target 50.1 29.7
//   [layer 0]
//   shape 64 3
//   weight <row-major values>
//   bias <values>
//   ...
//   [end]

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parse_value(const std::string& tok, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw std::runtime_error("model file: bad number '" + tok + "' in " + where);
  }
  return v;
}

}  // namespace

std::string serialize_model(const MdnModel& model) {
  std::ostringstream os;
  const auto& a = model.architecture();
  os << "sfcdelay-mdn 1\n[architecture]\n";
  os << "input_dim " << a.input_dim << "\nhidden";
  for (int w : a.hidden) os << ' ' << w;
  os << "\nkernels " << a.kernels << "\nvariance_floor " << fmt(model.variance_floor()) << '\n';
  const auto& n = model.normalization();
  os << "[normalization]\nfeature_mean";
  for (double v : n.feature_mean) os << ' ' << fmt(v);
  os << "\nfeature_std";
  for (double v : n.feature_std) os << ' ' << fmt(v);
  os << "\ntarget " << fmt(n.target_shift) << ' ' << fmt(n.target_scale) << '\n';
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& layer = model.layers()[l];
    os << "[layer " << l << "]\nshape " << layer.weight.rows() << ' ' << layer.weight.cols()
       << "\nweight";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) os << ' ' << fmt(layer.weight(r, c));
    }
    os << "\nbias";
    for (double v : layer.bias) os << ' ' << fmt(v);
    os << '\n';
  }
  os << "[end]\n";
  return os.str();
}

MdnModel deserialize_model(const std::string& text) {
  // Section name -> list of (key, tokens).
  std::map<std::string, std::map<std::string, std::vector<std::string>>> sections;
  std::istringstream is(text);
  std::string line, current;
  if (!std::getline(is, line) || line != "sfcdelay-mdn 1") {
    throw std::runtime_error("model file: missing 'sfcdelay-mdn 1' signature");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("model file: malformed section " + line);
      current = line.substr(1, line.size() - 2);
      sections[current];
      continue;
    }
    if (current.empty()) throw std::runtime_error("model file: data before first section");
    std::istringstream ls(line);
    std::string key, tok;
    ls >> key;
    auto& toks = sections[current][key];
    while (ls >> tok) toks.push_back(tok);
  }
  auto section = [&](const std::string& name) -> const auto& {
    auto it = sections.find(name);
    if (it == sections.end()) throw std::runtime_error("model file: missing section [" + name + "]");
    return it->second;
  };
  auto field = [&](const std::string& sec, const std::string& key) -> const auto& {
    const auto& s = section(sec);
    auto it = s.find(key);
    if (it == s.end()) {
      throw std::runtime_error("model file: missing '" + key + "' in section [" + sec + "]");
    }
    return it->second;
  };
  auto doubles = [&](const std::string& sec, const std::string& key) {
    std::vector<double> out;
    for (const auto& t : field(sec, key)) out.push_back(parse_value<double>(t, "[" + sec + "]"));
    return out;
  };
  auto single_int = [&](const std::string& sec, const std::string& key) {
    const auto& f = field(sec, key);
    if (f.size() != 1) throw std::runtime_error("model file: '" + key + "' expects one value");
    return parse_value<int>(f[0], "[" + sec + "]");
  };

  Architecture arch;
  arch.input_dim = single_int("architecture", "input_dim");
  arch.kernels = single_int("architecture", "kernels");
  arch.hidden.clear();
  for (const auto& t : field("architecture", "hidden")) {
    arch.hidden.push_back(parse_value<int>(t, "[architecture]"));
  }
  const auto floor = doubles("architecture", "variance_floor");
  if (floor.size() != 1) throw std::runtime_error("model file: bad variance_floor");
  arch.validate();
  MdnModel model(arch, floor[0]);

  Normalization norm;
  const auto fm = doubles("normalization", "feature_mean");
  const auto fs = doubles("normalization", "feature_std");
  const auto tg = doubles("normalization", "target");
  if (static_cast<int>(fm.size()) != arch.input_dim || static_cast<int>(fs.size()) != arch.input_dim ||
      tg.size() != 2) {
    throw std::runtime_error("model file: normalization shape does not match input_dim " +
                             std::to_string(arch.input_dim));
  }
  norm.feature_mean = Eigen::Map<const Vector>(fm.data(), arch.input_dim);
  norm.feature_std = Eigen::Map<const Vector>(fs.data(), arch.input_dim);
  norm.target_shift = tg[0];
  norm.target_scale = tg[1];
  model.set_normalization(norm);

  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const std::string sec = "layer " + std::to_string(l);
    auto& layer = model.layers()[l];
    const auto& shape = field(sec, "shape");
    if (shape.size() != 2 || parse_value<long>(shape[0], sec) != layer.weight.rows() ||
        parse_value<long>(shape[1], sec) != layer.weight.cols()) {
      throw std::runtime_error("model file: [" + sec + "] shape does not match architecture (expected " +
                               std::to_string(layer.weight.rows()) + " " +
                               std::to_string(layer.weight.cols()) + ")");
    }
    const auto w = doubles(sec, "weight");
    const auto b = doubles(sec, "bias");
    if (static_cast<Eigen::Index>(w.size()) != layer.weight.size() ||
        static_cast<Eigen::Index>(b.size()) != layer.bias.size()) {
      throw std::runtime_error("model file: [" + sec + "] value count does not match shape");
    }
    for (Eigen::Index r = 0, at = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = w[at++];
    }
    layer.bias = Eigen::Map<const Vector>(b.data(), layer.bias.size());
  }
  if (sections.size() != model.layers().size() + 3) {
    section("end");
    throw std::runtime_error("model file: unexpected extra sections for architecture");
  }
  section("end");
  return model;
}

void save_model(const MdnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model " + path.string());
  out << serialize_model(model);
  if (!out) throw std::runtime_error("write failed for model " + path.string());
}

MdnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

void write_loss_trace(std::span<const EpochReport> trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss trace " + path.string());
  out << "epoch loss\n";
  for (const auto& r : trace) out << r.epoch << ' ' << fmt(r.train_loss) << '\n';
}

}  // namespace sfcdelay::mdn
