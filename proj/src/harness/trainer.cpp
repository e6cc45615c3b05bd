#include "intentcaps/harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "intentcaps/harness/splits.hpp"

namespace intentcaps::harness {

namespace nd = ndiff;

template <typename T>
Adam<T>::Adam(std::vector<nd::Tensor<T>> params, double learning_rate, double beta1, double beta2, double epsilon)
    : params_(std::move(params)), learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  if (learning_rate < 0.0 || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || epsilon <= 0.0) {
    throw nd::ContractError("Adam: invalid hyperparameters");
  }
  for (const auto& p : params_) {
    first_.emplace_back(p.size(), 0.0);
    second_.emplace_back(p.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(beta1_, t);
  const double correction2 = 1.0 - std::pow(beta2_, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto values = params_[k].mutable_values();
    auto grad = params_[k].grad();
    auto& m = first_[k];
    auto& v = second_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = static_cast<double>(grad[i]);
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double update = learning_rate_ * (m[i] / correction1) / (std::sqrt(v[i] / correction2) + epsilon_);
      values[i] = static_cast<T>(static_cast<double>(values[i]) - update);
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template class Adam<float>;
template class Adam<double>;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Trainable tensors: everything but the embedding unless it is fine-tuned.
std::vector<nd::Tensor<float>> trainable(const Params& params, bool train_embeddings) {
  auto all = params.tensors();
  if (!train_embeddings) all.erase(all.begin());
  return all;
}

}  // namespace

TrainResult train(const RunConfig& config, Params initial, const text::Corpus& train_set,
                  const text::Corpus* validation, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw nd::ContractError("train: empty training corpus");
  if (initial.dims.num_intents != train_set.existing_labels.size()) {
    throw nd::ContractError("train: model has " + std::to_string(initial.dims.num_intents) +
                            " intents but the corpus has " + std::to_string(train_set.existing_labels.size()));
  }
  const bool has_validation = validation != nullptr && !validation->empty();

  TrainResult result;
  result.params = std::move(initial);
  Params& params = result.params;
  if (config.epochs == 0) return result;

  auto best = std::make_shared<Params>(params.clone());
  double best_accuracy = -1.0;
  auto last_good = std::make_shared<const Params>(params.clone());

  // Separate streams so changing the dropout rate leaves the batch order alone.
  std::mt19937_64 order_rng(config.seed ^ 0x5eed0a11ULL);
  std::mt19937_64 dropout_rng(config.seed ^ 0xd20b07ULL);
  const caps::InputDropout dropout{config.dropout_keep, &dropout_rng};

  Adam<float> adam(trainable(params, config.train_embeddings), config.learning_rate);
  for (auto& p : params.tensors()) p.zero_grad();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const float scale = 1.0f / static_cast<float>(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        const auto& sample = train_set.samples[order[i]];
        auto out = caps::forward<float>(sample.tokens, params, config.routing_iterations, dropout);
        auto loss = caps::margin_loss(out.activations(), sample.label, out.semantic.penalty, config.margins);
        const double value = static_cast<double>(loss.item());
        if (!std::isfinite(value)) {
          throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                    " on sample '" + sample.text + "'",
                                last_good);
        }
        loss_total += value;
        nd::backward(nd::affine(loss, scale));
      }
      // The PAD row never moves.
      auto pad_grad = params.embedding.mutable_grad().subspan(params.pad_id * params.dims.word_dim,
                                                              params.dims.word_dim);
      std::fill(pad_grad.begin(), pad_grad.end(), 0.0f);
      adam.step();
      for (auto& p : params.tensors()) p.zero_grad();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = loss_total / static_cast<double>(train_set.size());
    if (has_validation) {
      record.validation_accuracy = evaluate(params, *validation, config.routing_iterations).accuracy;
      if (record.validation_accuracy > best_accuracy) {
        best_accuracy = record.validation_accuracy;
        best->copy_values_from(params);
        result.best_epoch = epoch;
      }
    }
    record.seconds = seconds_since(start);
    result.curve.push_back(record);
    last_good = std::make_shared<const Params>(params.clone());
    if (on_epoch) on_epoch(record);
  }
  if (has_validation) {
    params.copy_values_from(*best);
  } else {
    result.best_epoch = config.epochs;
  }
  return result;
}

TrainResult train(const RunConfig& config, const text::EmbeddingTable& table, const text::Corpus& train_set,
                  const text::Corpus* validation, const EpochCallback& on_epoch) {
  config.validate();
  return train(config, caps::init_model_params<float>(config.model_dims(), table, config.seed), train_set,
               validation, on_epoch);
}

std::vector<std::size_t> predict(const Params& params, const text::Corpus& corpus, std::size_t iterations) {
  nd::NoGradGuard no_grad;
  std::vector<std::size_t> out;
  out.reserve(corpus.size());
  for (const auto& sample : corpus.samples) {
    out.push_back(caps::classify_existing(caps::forward<float>(sample.tokens, params, iterations).activations()));
  }
  return out;
}

MetricsReport evaluate(const Params& params, const text::Corpus& corpus, std::size_t iterations) {
  if (corpus.empty()) throw nd::ContractError("evaluate: empty corpus");
  if (corpus.partition != text::Partition::kExisting) {
    throw nd::ContractError("evaluate: expects a corpus of existing intents");
  }
  const auto start = Clock::now();
  std::vector<std::size_t> truth;
  for (const auto& s : corpus.samples) truth.push_back(s.label);
  auto report = compute_metrics(truth, predict(params, corpus, iterations), corpus.labels());
  report.seconds = seconds_since(start);
  return report;
}

caps::SimilarityMatrix similarity_for(const text::Corpus& corpus, const std::vector<std::string>& intent_names,
                                      const std::vector<double>& intent_vectors, std::size_t dim, double sigma) {
  auto gather = [&](const std::vector<std::string>& labels) {
    std::vector<double> out;
    for (const auto& label : labels) {
      const auto it = std::find(intent_names.begin(), intent_names.end(), label);
      if (it == intent_names.end()) throw text::LabelMappingError("no intent embedding for '" + label + "'");
      const auto row = static_cast<std::size_t>(it - intent_names.begin());
      out.insert(out.end(), intent_vectors.begin() + row * dim, intent_vectors.begin() + (row + 1) * dim);
    }
    return out;
  };
  return caps::intent_similarity(gather(corpus.emerging_labels), gather(corpus.existing_labels), dim, sigma);
}

ZslReport zsl_evaluate(const Params& params, const text::Corpus& emerging, const caps::SimilarityMatrix& similarity,
                       std::size_t iterations) {
  if (emerging.empty()) throw nd::ContractError("zsl_evaluate: empty corpus");
  if (emerging.partition != text::Partition::kEmerging) {
    throw nd::ContractError("zsl_evaluate: expects a corpus of emerging intents");
  }
  for (const auto& z : emerging.emerging_labels) {
    if (std::find(emerging.existing_labels.begin(), emerging.existing_labels.end(), z) !=
        emerging.existing_labels.end()) {
      throw nd::ContractError("zsl_evaluate: label '" + z + "' is also an existing intent");
    }
  }
  if (similarity.emerging != emerging.emerging_labels.size() || similarity.existing != params.dims.num_intents) {
    throw nd::DimensionError("zsl_evaluate: similarity matrix does not match the label sets");
  }
  const auto start = Clock::now();
  nd::NoGradGuard no_grad;
  ZslReport report;
  report.similarity = similarity;
  report.existing_labels = emerging.existing_labels;
  std::vector<std::size_t> truth;
  for (const auto& sample : emerging.samples) {
    auto out = caps::forward<float>(sample.tokens, params, iterations);
    auto zs = caps::zero_shot_detect(out.routing, out.predictions, similarity, iterations);
    truth.push_back(sample.label);
    report.predicted.push_back(zs.predicted);
  }
  report.metrics = compute_metrics(truth, report.predicted, emerging.labels());
  report.metrics.seconds = seconds_since(start);
  const auto variance = caps::similarity_variance(similarity);
  for (std::size_t l = 0; l < emerging.labels().size(); ++l) {
    ZslIntentStats stats;
    stats.label = emerging.labels()[l];
    stats.support = report.metrics.support[l];
    stats.accuracy = report.metrics.class_recall[l];
    stats.similarity_variance = variance[l];
    report.intents.push_back(stats);
  }
  return report;
}

CrossValidation cross_validate(const RunConfig& config, const text::EmbeddingTable& table,
                               const text::Corpus& corpus) {
  const auto assignment = stratified_folds(corpus, config.folds, config.seed);
  CrossValidation cv;
  for (std::size_t fold = 0; fold < config.folds; ++fold) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < assignment.size(); ++i) (assignment[i] == fold ? test_idx : train_idx).push_back(i);
    const auto train_part = corpus.subset(train_idx, text::SplitTag::kTrain);
    const auto test_part = corpus.subset(test_idx, text::SplitTag::kTest);
    auto trained = train(config, table, train_part);
    cv.folds.push_back(evaluate(trained.params, test_part, config.routing_iterations));
    cv.mean_accuracy += cv.folds.back().accuracy / static_cast<double>(config.folds);
    cv.mean_f1 += cv.folds.back().f1 / static_cast<double>(config.folds);
  }
  return cv;
}

}  // namespace intentcaps::harness
