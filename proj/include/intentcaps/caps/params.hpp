#ifndef INTENTCAPS_CAPS_PARAMS_HPP_
#define INTENTCAPS_CAPS_PARAMS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "intentcaps/ndiff/tensor.hpp"
#include "intentcaps/text/embeddings.hpp"

namespace intentcaps::caps {

using ndiff::Tensor;

struct ModelDims {
  std::size_t word_dim = 300;       // D_W
  std::size_t hidden_dim = 32;      // D_H, per LSTM direction
  std::size_t attention_dim = 20;   // D_A
  std::size_t heads = 3;            // R
  std::size_t num_intents = 5;      // K
  std::size_t prediction_dim = 10;  // D_P

  std::size_t state_dim() const { return 2 * hidden_dim; }
  void validate() const;
};

// One LSTM direction. Gate columns are ordered input, forget, output, candidate.
template <typename T>
struct LstmParams {
  Tensor<T> input_weights;      // D_W x 4D_H
  Tensor<T> recurrent_weights;  // D_H x 4D_H
  Tensor<T> bias;               // 1 x 4D_H
};

template <typename T>
struct SemanticCapsParams {
  LstmParams<T> forward;
  LstmParams<T> backward;
  Tensor<T> ws1;  // D_A x 2D_H
  Tensor<T> ws2;  // R x D_A
};

template <typename T>
struct DetectionCapsParams {
  // Shape {K, R, 2D_H, D_P}; block (k, r) is W_{k,r}.
  Tensor<T> transforms;
};

template <typename T>
struct ModelParams {
  ModelDims dims;
  Tensor<T> embedding;  // |V| x D_W, the PAD row stays zero
  std::size_t pad_id = 0;
  SemanticCapsParams<T> semantic;
  DetectionCapsParams<T> detection;

  // Every trainable tensor, in a fixed order.
  std::vector<Tensor<T>> tensors() const;
  std::vector<std::string> tensor_names() const;
  // Deep copy (fresh leaves).
  ModelParams clone() const;
  void copy_values_from(const ModelParams& other);
  template <typename U>
  ModelParams<U> cast() const;
};

// Glorot-uniform weights, zero biases except forget-gate biases of 1, and the
// embedding initialized from `table`. Deterministic in `seed`.
template <typename T>
ModelParams<T> init_model_params(const ModelDims& dims, const text::EmbeddingTable& table,
                                 std::uint64_t seed);

}  // namespace intentcaps::caps

#endif  // INTENTCAPS_CAPS_PARAMS_HPP_
