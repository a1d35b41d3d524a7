#include "reco/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "reco/error.hpp"
#include "reco/io.hpp"
#include "reco/sampler.hpp"

namespace reco {

Objective parse_objective(std::string_view name) {
  if (name == "info_nce") return Objective::info_nce;
  if (name == "supcon") return Objective::supcon;
  if (name == "paco") return Objective::paco;
  if (name == "reco_supcon") return Objective::reco_supcon;
  if (name == "reco_paco") return Objective::reco_paco;
  fail_config("unknown objective '" + std::string(name) +
              "' (expected info_nce|supcon|paco|reco_supcon|reco_paco)");
}

const char* to_string(Objective o) noexcept {
  switch (o) {
    case Objective::info_nce:
      return "info_nce";
    case Objective::supcon:
      return "supcon";
    case Objective::paco:
      return "paco";
    case Objective::reco_supcon:
      return "reco_supcon";
    case Objective::reco_paco:
      return "reco_paco";
  }
  return "unknown";
}

bool uses_centers(Objective o) noexcept { return o == Objective::paco || o == Objective::reco_paco; }
bool uses_mask(Objective o) noexcept { return o == Objective::reco_supcon || o == Objective::reco_paco; }

void TrainConfig::validate() const {
  if (!(lr_max >= 0.0)) fail_config("lr_max must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail_config("momentum must be in [0,1)");
  if (!(temperature > 0.0)) fail_config("temperature must be > 0");
  if (!(weight_decay >= 0.0)) fail_config("weight_decay must be >= 0");
  if (epochs < 1) fail_config("epochs must be >= 1");
  if (batch_size < 4 || batch_size % 2 != 0) fail_config("batch_size must be an even number >= 4");
  if (hidden_dim < 1 || embed_dim < 2) fail_config("hidden_dim must be >= 1 and embed_dim >= 2");
  if (!(view_noise >= 0.0)) fail_config("view_noise must be >= 0");
}

double lr_at(const TrainConfig& config, long long step, long long total_steps) {
  if (total_steps <= 0) fail_config("total_steps must be positive");
  if (step < 0 || step > total_steps) {
    fail_config("step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
  }
  if (step == total_steps) return 0.0;
  const double phase = std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps);
  return config.lr_max * (1.0 + std::cos(phase)) / 2.0;
}

void momentum_step(Vector& theta, Vector& velocity, const Vector& grad, double lr, double momentum) {
  velocity = momentum * velocity + grad;
  theta -= lr * velocity;
}

namespace {

double positive_terms(const EmbeddingBatch& batch, const TrainConfig& config) {
  const auto n = static_cast<double>(batch.size());
  if (config.objective == Objective::info_nce || config.mean_over_positives) return n;
  double terms = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t k = 0; k < batch.size(); ++k) terms += (k != i && batch.labels[k] == batch.labels[i]);
  }
  if (uses_centers(config.objective)) terms += n;
  return terms;
}

}  // namespace

BatchGradient batch_objective(const Encoder& encoder, const Matrix& views,
                              const std::vector<int>& sample_labels, const Matrix& centers,
                              const NegativeMask* mask, const TrainConfig& config) {
  Encoder::Cache cache;
  const Matrix& z = encoder.forward(views, cache);
  const auto batch = EmbeddingBatch::from_view_pairs(z, sample_labels);
  const double tau = config.temperature;

  LossResult loss;
  switch (config.objective) {
    case Objective::info_nce:
      loss = info_nce(batch, tau);
      break;
    case Objective::supcon:
      loss = supcon(batch, tau, config.mean_over_positives);
      break;
    case Objective::paco:
      loss = paco(batch, centers, tau, config.mean_over_positives);
      break;
    case Objective::reco_supcon:
    case Objective::reco_paco: {
      if (!mask) fail_data("objective " + std::string(to_string(config.objective)) + " needs a negative mask");
      CombinedOptions opt;
      opt.base = config.objective == Objective::reco_supcon ? BaseObjective::supcon : BaseObjective::paco;
      opt.alpha = config.alpha;
      opt.temperature = tau;
      opt.include_positive_in_denominator = config.include_positive_in_denominator;
      opt.mean_over_positives = config.mean_over_positives;
      loss = combined(batch, centers, *mask, opt);
      break;
    }
  }

  // Normalize by the number of anchor-positive terms so the step size does
  // not depend on how many same-class views a batch happens to contain.
  const double scale = 1.0 / positive_terms(batch, config);
  BatchGradient out;
  out.loss = loss.value * scale;
  out.grad_params = encoder.backward(views, cache, loss.grad_z * scale);
  if (loss.has_centers) out.grad_centers = loss.grad_centers * scale;
  return out;
}

std::string TrainResult::history_csv() const {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    out += std::to_string(e) + "," + io::format_double(history[e]) + "\n";
  }
  return out;
}

TrainResult train(const SynthDataset& dataset, const Taxonomy& tax, const TrainConfig& config) {
  config.validate();
  auto train_idx = dataset.indices(Split::train);
  const int per_batch = config.batch_size / 2;
  if (train_idx.size() < 2) fail_data("train split needs at least 2 samples");

  SimilarityTable table;
  if (uses_mask(config.objective)) {
    table = build_similarity_table(tax, dataset.class_ids, config.normalization);
  }

  TrainResult result;
  result.initial = Encoder::initialize(dataset.feature_dim(), config.hidden_dim, config.embed_dim, config.seed);
  Encoder& enc = result.encoder;
  enc = result.initial;

  std::mt19937_64 rng(config.seed ^ 0x5eed5eed5eed5eedULL);
  const SamplerConfig sampler{config.seed, config.resample_every_step};

  const long long batches_per_epoch =
      static_cast<long long>(train_idx.size()) / per_batch +
      ((train_idx.size() % per_batch) >= 2 ? 1 : 0);
  const long long total_steps = batches_per_epoch * config.epochs;

  Vector theta = enc.parameters();
  Vector velocity = Vector::Zero(theta.size());
  Matrix& centers = result.centers;
  Matrix center_velocity;
  bool centers_ready = false;

  std::vector<std::vector<std::size_t>> by_class(dataset.class_ids.size());
  for (auto s : train_idx) by_class[dataset.labels[s]].push_back(s);
  std::vector<std::size_t> class_order(by_class.size());
  std::iota(class_order.begin(), class_order.end(), 0);
  std::size_t largest = 0;
  for (const auto& c : by_class) largest = std::max(largest, c.size());

  long long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Class-stratified order: shuffle within each class, then deal classes
    // round-robin so batch class counts are the same from epoch to epoch.
    for (auto& c : by_class) std::shuffle(c.begin(), c.end(), rng);
    std::shuffle(class_order.begin(), class_order.end(), rng);
    train_idx.clear();
    for (std::size_t r = 0; r < largest; ++r) {
      for (auto c : class_order) {
        if (r < by_class[c].size()) train_idx.push_back(by_class[c][r]);
      }
    }
    double epoch_loss = 0.0;
    long long epoch_batches = 0;
    for (std::size_t start = 0; start + 2 <= train_idx.size(); start += per_batch) {
      const std::size_t stop = std::min(train_idx.size(), start + per_batch);
      const auto count = static_cast<Eigen::Index>(stop - start);
      Matrix features(count, dataset.feature_dim());
      std::vector<int> labels(count);
      for (Eigen::Index r = 0; r < count; ++r) {
        const auto s = train_idx[start + r];
        features.row(r) = dataset.features.row(static_cast<Eigen::Index>(s));
        labels[r] = dataset.labels[s];
      }
      const Matrix views = make_views(features, config.view_noise, rng);

      if (uses_centers(config.objective) && !centers_ready) {
        // First-batch class means of the initial embeddings; classes missing
        // from that batch fall back to the mean over their training samples.
        const Matrix z0 = enc.embed(views);
        const auto k = static_cast<Eigen::Index>(dataset.class_ids.size());
        centers = Matrix::Zero(k, config.embed_dim);
        std::vector<int> counts(k, 0);
        for (Eigen::Index r = 0; r < z0.rows(); ++r) {
          centers.row(labels[r / 2]) += z0.row(r);
          ++counts[labels[r / 2]];
        }
        for (Eigen::Index c = 0; c < k; ++c) {
          if (counts[c] > 0) {
            centers.row(c) /= counts[c];
            continue;
          }
          std::vector<Eigen::Index> rows;
          for (auto s : dataset.indices(Split::train)) {
            if (dataset.labels[s] == c) rows.push_back(static_cast<Eigen::Index>(s));
          }
          Matrix own(static_cast<Eigen::Index>(rows.size()), dataset.feature_dim());
          for (std::size_t r = 0; r < rows.size(); ++r) own.row(static_cast<Eigen::Index>(r)) = dataset.features.row(rows[r]);
          if (!rows.empty()) centers.row(c) = enc.embed(own).colwise().mean();
        }
        center_velocity = Matrix::Zero(centers.rows(), centers.cols());
        centers_ready = true;
      }

      NegativeMask mask;
      if (uses_mask(config.objective)) {
        std::vector<int> view_labels(2 * count);
        for (Eigen::Index r = 0; r < 2 * count; ++r) view_labels[r] = labels[r / 2];
        const auto key = config.resample_every_step ? static_cast<std::uint64_t>(step)
                                                    : static_cast<std::uint64_t>(epoch);
        mask = draw_mask(acceptance_matrix(table, view_labels), sampler, key);
      }

      BatchGradient g;
      try {
        g = batch_objective(enc, views, labels, centers, uses_mask(config.objective) ? &mask : nullptr, config);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numeric) throw;
        fail_numeric(std::string(e.what()) + " at epoch " + std::to_string(epoch));
      }
      if (!std::isfinite(g.loss) || !g.grad_params.allFinite()) {
        fail_numeric("non-finite loss at epoch " + std::to_string(epoch));
      }
      const double lr = lr_at(config, step, total_steps);
      if (config.weight_decay > 0.0) g.grad_params += config.weight_decay * theta;
      momentum_step(theta, velocity, g.grad_params, lr, config.momentum);
      enc.set_parameters(theta);
      if (uses_centers(config.objective)) {
        center_velocity = config.momentum * center_velocity + g.grad_centers;
        centers -= lr * center_velocity;
      }
      epoch_loss += g.loss;
      ++epoch_batches;
      ++step;
    }
    result.history.push_back(epoch_loss / static_cast<double>(epoch_batches));
  }
  result.steps = step;
  return result;
}

}  // namespace reco
