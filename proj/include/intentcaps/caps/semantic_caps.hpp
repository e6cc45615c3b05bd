#ifndef INTENTCAPS_CAPS_SEMANTIC_CAPS_HPP_
#define INTENTCAPS_CAPS_SEMANTIC_CAPS_HPP_

#include <random>
#include <span>
#include <vector>

#include "intentcaps/caps/params.hpp"
#include "intentcaps/ndiff/ops.hpp"
#include "intentcaps/text/corpus.hpp"

namespace intentcaps::caps {

// Inverted dropout on word vectors; keep_rate == 1 disables it.
struct InputDropout {
  double keep_rate = 1.0;
  std::mt19937_64* rng = nullptr;

  bool active() const { return rng != nullptr && keep_rate < 1.0; }
};

template <typename T>
struct AttentionOutput {
  Tensor<T> attention;  // A, R x T
  Tensor<T> penalty;    // ||A A^T - I||_F^2
};

template <typename T>
struct SemanticOutput {
  Tensor<T> hidden;     // H, T x 2D_H
  Tensor<T> attention;  // A, R x T
  Tensor<T> semantic;   // M = A H, R x 2D_H
  Tensor<T> penalty;
  std::size_t length = 0;  // real (non-pad) tokens
};

// Number of leading non-pad tokens. Pads are only allowed as a suffix.
std::size_t real_length(std::span<const text::WordId> tokens, text::WordId pad_id);

// Word vectors of `tokens`, with dropout applied when active.
template <typename T>
Tensor<T> embed(std::span<const text::WordId> tokens, const Tensor<T>& embedding,
                const InputDropout& dropout = {});

// BiLSTM over the first `length` rows of `inputs` (T x D_W). Row t of the
// result concatenates the forward state (left to right from zero state) and
// the backward state (right to left from zero state, starting at the last real
// token). Rows at or beyond `length` are zero.
template <typename T>
Tensor<T> bilstm_encode(const Tensor<T>& inputs, const SemanticCapsParams<T>& params,
                        std::size_t length);

// Multi-head self-attention over H with pad positions (>= length) masked out.
template <typename T>
AttentionOutput<T> attend(const Tensor<T>& hidden, const SemanticCapsParams<T>& params,
                          std::size_t length);

// M = A H.
template <typename T>
Tensor<T> semantic_vectors(const Tensor<T>& attention, const Tensor<T>& hidden);

// Full SemanticCaps pass for one (possibly right-padded) utterance.
template <typename T>
SemanticOutput<T> semantic_caps(std::span<const text::WordId> tokens, const ModelParams<T>& params,
                                const InputDropout& dropout = {});

}  // namespace intentcaps::caps

#endif  // INTENTCAPS_CAPS_SEMANTIC_CAPS_HPP_
