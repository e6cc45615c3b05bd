#ifndef INTENTCAPS_CAPS_DETECTION_CAPS_HPP_
#define INTENTCAPS_CAPS_DETECTION_CAPS_HPP_

#include <span>
#include <vector>

#include "intentcaps/caps/params.hpp"
#include "intentcaps/ndiff/ops.hpp"

namespace intentcaps::caps {

// Prediction vectors are stored as a [(K*R) x D_P] matrix; row k*R + r holds
// p_{k|r}.
template <typename T>
struct PredictionVectors {
  Tensor<T> values;
  std::size_t intents = 0;  // K
  std::size_t heads = 0;    // R

  std::size_t dim() const { return values.cols(); }
  std::size_t row(std::size_t k, std::size_t r) const { return k * heads + r; }
};

// Per-iteration record of one routing run. logits[i] is b as it entered
// iteration i (all zero for i = 0); couplings[i], preactivations[i] and
// activations[i] are c, s and v computed in iteration i. final_logits is b
// after the last agreement update.
template <typename T>
struct RoutingTrace {
  std::size_t intents = 0;
  std::size_t heads = 0;
  std::size_t iterations = 0;
  std::vector<Tensor<T>> logits;          // K x R each
  std::vector<Tensor<T>> couplings;       // K x R each
  std::vector<Tensor<T>> preactivations;  // K x D_P each
  std::vector<Tensor<T>> activations;     // K x D_P each
  Tensor<T> final_logits;

  const Tensor<T>& output() const { return activations.back(); }
  const Tensor<T>& final_couplings() const { return couplings.back(); }
};

struct MarginParams {
  double down_weight = 0.5;     // lambda
  double positive_margin = 0.9;  // m+
  double negative_margin = 0.1;  // m-
  double penalty_weight = 1e-4;  // alpha

  void validate() const;
};

// P[k][r] = m_r W_{k,r} as a single differentiable node.
template <typename T>
PredictionVectors<T> prediction_vectors(const Tensor<T>& semantic, const DetectionCapsParams<T>& params);

// Row-wise squash: (|s|^2 / (1 + |s|^2)) s / |s|, with zero rows mapped to zero.
template <typename T>
Tensor<T> squash(const Tensor<T>& s);

// Reference squash of a single vector, in double precision.
std::vector<double> squash(std::span<const double> s);

// Routing-by-agreement: the coupling softmax runs over intents for each head,
// and gradients flow through every iteration.
template <typename T>
RoutingTrace<T> dynamic_routing(const PredictionVectors<T>& predictions, std::size_t iterations);

// Margin loss of one utterance plus alpha * penalty.
template <typename T>
Tensor<T> margin_loss(const Tensor<T>& activations, std::size_t true_label, const Tensor<T>& penalty,
                      const MarginParams& margins);

// Row norms of an activation matrix.
template <typename T>
std::vector<double> activation_norms(const Tensor<T>& activations);

// Index of the largest norm; ties go to the lowest index.
std::size_t argmax_norm(std::span<const double> norms);

template <typename T>
std::size_t classify_existing(const Tensor<T>& activations) {
  auto norms = activation_norms(activations);
  return argmax_norm(norms);
}

}  // namespace intentcaps::caps

#endif  // INTENTCAPS_CAPS_DETECTION_CAPS_HPP_
