#ifndef INTENTCAPS_HARNESS_TRAINER_HPP_
#define INTENTCAPS_HARNESS_TRAINER_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "intentcaps/caps/network.hpp"
#include "intentcaps/harness/config.hpp"
#include "intentcaps/harness/metrics.hpp"

namespace intentcaps::harness {

using Params = caps::ModelParams<float>;

// Raised when a training loss turns non-finite. Carries the parameters as
// they were at the end of the last completed epoch.
class DivergenceError : public ndiff::NumericError {
 public:
  DivergenceError(const std::string& message, std::shared_ptr<const Params> last_good)
      : ndiff::NumericError(message), last_good_(std::move(last_good)) {}
  const Params& last_good() const { return *last_good_; }

 private:
  std::shared_ptr<const Params> last_good_;
};

// Adam over a fixed list of leaf tensors, using their accumulated grads.
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<ndiff::Tensor<T>> params, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void step();
  void zero_grad();
  std::size_t steps() const { return steps_; }

 private:
  std::vector<ndiff::Tensor<T>> params_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  double learning_rate_, beta1_, beta2_, epsilon_;
  std::size_t steps_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;               // 1-based
  double mean_loss = 0.0;              // over utterances
  double validation_accuracy = -1.0;   // -1 without a validation set
  double seconds = 0.0;
};

struct TrainResult {
  Params params;  // best-validation parameters, or the last epoch's without validation
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;  // 0: the initial parameters
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam on the margin loss. Deterministic in config.seed.
TrainResult train(const RunConfig& config, Params initial, const text::Corpus& train_set,
                  const text::Corpus* validation = nullptr, const EpochCallback& on_epoch = {});

// Same, starting from init_model_params(config.model_dims(), table, config.seed).
TrainResult train(const RunConfig& config, const text::EmbeddingTable& table, const text::Corpus& train_set,
                  const text::Corpus* validation = nullptr, const EpochCallback& on_epoch = {});

// Predicted existing-intent index per sample.
std::vector<std::size_t> predict(const Params& params, const text::Corpus& corpus, std::size_t iterations);

MetricsReport evaluate(const Params& params, const text::Corpus& corpus, std::size_t iterations);

struct ZslIntentStats {
  std::string label;
  std::size_t support = 0;
  double accuracy = 0.0;
  double similarity_variance = 0.0;  // var(q_l)
};

struct ZslReport {
  MetricsReport metrics;
  caps::SimilarityMatrix similarity;
  std::vector<std::string> existing_labels;  // columns of similarity
  std::vector<ZslIntentStats> intents;
  std::vector<std::size_t> predicted;
};

// Q between corpus.emerging_labels and corpus.existing_labels, looked up in
// `intent_table` (names and vectors row-aligned).
caps::SimilarityMatrix similarity_for(const text::Corpus& corpus, const std::vector<std::string>& intent_names,
                                      const std::vector<double>& intent_vectors, std::size_t dim, double sigma);

ZslReport zsl_evaluate(const Params& params, const text::Corpus& emerging, const caps::SimilarityMatrix& similarity,
                       std::size_t iterations);

struct CrossValidation {
  std::vector<MetricsReport> folds;
  double mean_accuracy = 0.0;
  double mean_f1 = 0.0;
};

CrossValidation cross_validate(const RunConfig& config, const text::EmbeddingTable& table,
                               const text::Corpus& corpus);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_TRAINER_HPP_
