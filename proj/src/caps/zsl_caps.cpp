#include "intentcaps/caps/zsl_caps.hpp"

#include <algorithm>
#include <cmath>

namespace intentcaps::caps {

namespace nd = ndiff;

template <typename T>
PredictionVectors<T> vote_vectors(const RoutingTrace<T>& trace, const PredictionVectors<T>& predictions) {
  if (trace.intents != predictions.intents || trace.heads != predictions.heads || trace.couplings.empty()) {
    throw nd::ContractError("vote_vectors: routing trace does not belong to these predictions");
  }
  const std::size_t rows = predictions.intents * predictions.heads;
  Tensor<T> g = nd::mul_col(predictions.values, nd::reshape(trace.final_couplings(), {rows, 1}));
  return {g, predictions.intents, predictions.heads};
}

SimilarityMatrix intent_similarity(std::span<const double> emerging, std::span<const double> existing,
                                   std::size_t dim, double sigma) {
  if (!(sigma > 0.0)) throw nd::ContractError("intent_similarity: sigma must be positive");
  if (dim == 0 || emerging.size() % dim != 0 || existing.size() % dim != 0 || existing.empty() ||
      emerging.empty()) {
    throw nd::DimensionError("intent_similarity: embedding sizes do not match dimension " + std::to_string(dim));
  }
  SimilarityMatrix out;
  out.emerging = emerging.size() / dim;
  out.existing = existing.size() / dim;
  out.sigma = sigma;
  out.q.resize(out.emerging * out.existing);
  const double inv_var = 1.0 / (sigma * sigma);
  std::vector<double> neg_dist(out.existing);
  for (std::size_t l = 0; l < out.emerging; ++l) {
    for (std::size_t k = 0; k < out.existing; ++k) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double diff = emerging[l * dim + j] - existing[k * dim + j];
        d2 += diff * diff;
      }
      neg_dist[k] = -d2 * inv_var;
    }
    const double mx = *std::max_element(neg_dist.begin(), neg_dist.end());
    double total = 0.0;
    for (std::size_t k = 0; k < out.existing; ++k) total += std::exp(neg_dist[k] - mx);
    for (std::size_t k = 0; k < out.existing; ++k) {
      out.q[l * out.existing + k] = std::exp(neg_dist[k] - mx) / total;
    }
  }
  return out;
}

template <typename T>
PredictionVectors<T> zero_shot_prediction_vectors(const SimilarityMatrix& similarity,
                                                  const PredictionVectors<T>& votes) {
  const std::size_t K = votes.intents, R = votes.heads, D = votes.dim();
  if (similarity.existing != K) {
    throw nd::DimensionError("zero_shot_prediction_vectors: Q has " + std::to_string(similarity.existing) +
                             " columns but there are " + std::to_string(K) + " existing intents");
  }
  const std::size_t L = similarity.emerging;
  std::vector<T> q(similarity.q.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = static_cast<T>(similarity.q[i]);
  Tensor<T> u = nd::matmul(Tensor<T>::from({L, K}, std::move(q)), nd::reshape(votes.values, {K, R * D}));
  return {nd::reshape(u, {L * R, D}), L, R};
}

template <typename T>
ZeroShotResult<T> classify_emerging(const PredictionVectors<T>& emerging, std::size_t iterations) {
  ZeroShotResult<T> out;
  out.emerging = emerging;
  out.routing = dynamic_routing(emerging, iterations);
  out.norms = activation_norms(out.routing.output());
  out.predicted = argmax_norm(out.norms);
  return out;
}

template <typename T>
ZeroShotResult<T> zero_shot_detect(const RoutingTrace<T>& trace, const PredictionVectors<T>& predictions,
                                   const SimilarityMatrix& similarity, std::size_t iterations) {
  auto votes = vote_vectors(trace, predictions);
  auto out = classify_emerging(zero_shot_prediction_vectors(similarity, votes), iterations);
  out.votes = votes;
  return out;
}

std::vector<double> similarity_variance(const SimilarityMatrix& similarity) {
  std::vector<double> out(similarity.emerging, 0.0);
  const double n = static_cast<double>(similarity.existing);
  for (std::size_t l = 0; l < similarity.emerging; ++l) {
    auto row = similarity.row(l);
    double mean = 0.0;
    for (double x : row) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : row) var += (x - mean) * (x - mean);
    out[l] = var / n;
  }
  return out;
}

#define INTENTCAPS_INSTANTIATE(T)                                                                         \
  template PredictionVectors<T> vote_vectors<T>(const RoutingTrace<T>&, const PredictionVectors<T>&);   \
  template PredictionVectors<T> zero_shot_prediction_vectors<T>(const SimilarityMatrix&,                \
                                                                const PredictionVectors<T>&);           \
  template ZeroShotResult<T> classify_emerging<T>(const PredictionVectors<T>&, std::size_t);            \
  template ZeroShotResult<T> zero_shot_detect<T>(const RoutingTrace<T>&, const PredictionVectors<T>&,   \
                                                 const SimilarityMatrix&, std::size_t);

INTENTCAPS_INSTANTIATE(float)
INTENTCAPS_INSTANTIATE(double)
#undef INTENTCAPS_INSTANTIATE

}  // namespace intentcaps::caps
