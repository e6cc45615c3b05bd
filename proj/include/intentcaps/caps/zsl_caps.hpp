#ifndef INTENTCAPS_CAPS_ZSL_CAPS_HPP_
#define INTENTCAPS_CAPS_ZSL_CAPS_HPP_

#include <span>
#include <vector>

#include "intentcaps/caps/detection_caps.hpp"

namespace intentcaps::caps {

// L x K row-stochastic similarity between emerging and existing intents.
struct SimilarityMatrix {
  std::size_t emerging = 0;  // L
  std::size_t existing = 0;  // K
  double sigma = 1.0;
  std::vector<double> q;  // row-major L x K

  double at(std::size_t l, std::size_t k) const { return q[l * existing + k]; }
  std::span<const double> row(std::size_t l) const {
    return std::span<const double>(q).subspan(l * existing, existing);
  }
};

template <typename T>
struct ZeroShotResult {
  PredictionVectors<T> votes;     // G, K*R rows
  PredictionVectors<T> emerging;  // U, L*R rows
  RoutingTrace<T> routing;        // over U; output() is n
  std::vector<double> norms;      // ||n_l||
  std::size_t predicted = 0;
};

// g_{k,r} = c_{kr} p_{k|r} with the last iteration's couplings.
template <typename T>
PredictionVectors<T> vote_vectors(const RoutingTrace<T>& trace, const PredictionVectors<T>& predictions);

// q_{lk} = softmax_k(-||e_l - e_k||^2 / sigma^2). Embeddings are row-major
// [L x dim] and [K x dim].
SimilarityMatrix intent_similarity(std::span<const double> emerging, std::span<const double> existing,
                                   std::size_t dim, double sigma);

// u_{l|r} = sum_k q_{lk} g_{k,r}.
template <typename T>
PredictionVectors<T> zero_shot_prediction_vectors(const SimilarityMatrix& similarity,
                                                  const PredictionVectors<T>& votes);

// Routes U to L emerging capsules and picks the largest-norm activation.
template <typename T>
ZeroShotResult<T> classify_emerging(const PredictionVectors<T>& emerging, std::size_t iterations);

// Vote vectors -> U -> routing, for one utterance's existing-intent trace.
template <typename T>
ZeroShotResult<T> zero_shot_detect(const RoutingTrace<T>& trace, const PredictionVectors<T>& predictions,
                                   const SimilarityMatrix& similarity, std::size_t iterations);

// Population variance of each row of Q.
std::vector<double> similarity_variance(const SimilarityMatrix& similarity);

}  // namespace intentcaps::caps

#endif  // INTENTCAPS_CAPS_ZSL_CAPS_HPP_
