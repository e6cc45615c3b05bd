#ifndef INTENTCAPS_CAPS_NETWORK_HPP_
#define INTENTCAPS_CAPS_NETWORK_HPP_

#include <span>

#include "intentcaps/caps/detection_caps.hpp"
#include "intentcaps/caps/semantic_caps.hpp"
#include "intentcaps/caps/zsl_caps.hpp"

namespace intentcaps::caps {

// SemanticCaps followed by DetectionCaps for one utterance.
template <typename T>
struct NetworkOutput {
  SemanticOutput<T> semantic;
  PredictionVectors<T> predictions;
  RoutingTrace<T> routing;

  const Tensor<T>& activations() const { return routing.output(); }
};

template <typename T>
NetworkOutput<T> forward(std::span<const text::WordId> tokens, const ModelParams<T>& params,
                         std::size_t routing_iterations, const InputDropout& dropout = {}) {
  NetworkOutput<T> out;
  out.semantic = semantic_caps(tokens, params, dropout);
  out.predictions = prediction_vectors(out.semantic.semantic, params.detection);
  out.routing = dynamic_routing(out.predictions, routing_iterations);
  return out;
}

}  // namespace intentcaps::caps

#endif  // INTENTCAPS_CAPS_NETWORK_HPP_
