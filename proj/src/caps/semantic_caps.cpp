#include "intentcaps/caps/semantic_caps.hpp"

#include <stdexcept>

namespace intentcaps::caps {

namespace nd = ndiff;

std::size_t real_length(std::span<const text::WordId> tokens, text::WordId pad_id) {
  std::size_t length = 0;
  while (length < tokens.size() && tokens[length] != pad_id) ++length;
  for (std::size_t i = length; i < tokens.size(); ++i) {
    if (tokens[i] != pad_id) throw std::invalid_argument("pad tokens must form a suffix");
  }
  return length;
}

template <typename T>
Tensor<T> embed(std::span<const text::WordId> tokens, const Tensor<T>& embedding,
                const InputDropout& dropout) {
  Tensor<T> rows = nd::gather_rows(embedding, tokens);
  if (!dropout.active()) return rows;
  std::bernoulli_distribution keep(dropout.keep_rate);
  const T scale = static_cast<T>(1.0 / dropout.keep_rate);
  std::vector<T> mask(rows.size());
  for (auto& m : mask) m = keep(*dropout.rng) ? scale : T(0);
  return nd::mul(rows, Tensor<T>::from(rows.shape(), std::move(mask)));
}

namespace {

// Runs one LSTM direction over rows of `projected` (already x W + b) in the
// given order and returns the hidden states indexed by position.
template <typename T>
std::vector<Tensor<T>> run_lstm(const Tensor<T>& projected, const Tensor<T>& recurrent,
                                std::size_t hidden, bool reverse) {
  const std::size_t length = projected.rows();
  std::vector<Tensor<T>> states(length);
  Tensor<T> h, c;
  for (std::size_t step = 0; step < length; ++step) {
    const std::size_t t = reverse ? length - 1 - step : step;
    Tensor<T> z = nd::slice(projected, 0, t, t + 1);
    if (h.defined()) z = nd::add(z, nd::matmul(h, recurrent));
    Tensor<T> sig = nd::sigmoid(nd::slice(z, 1, 0, 3 * hidden));
    Tensor<T> in_gate = nd::slice(sig, 1, 0, hidden);
    Tensor<T> forget_gate = nd::slice(sig, 1, hidden, 2 * hidden);
    Tensor<T> out_gate = nd::slice(sig, 1, 2 * hidden, 3 * hidden);
    Tensor<T> candidate = nd::tanh(nd::slice(z, 1, 3 * hidden, 4 * hidden));
    Tensor<T> update = nd::mul(in_gate, candidate);
    c = c.defined() ? nd::add(nd::mul(forget_gate, c), update) : update;
    h = nd::mul(out_gate, nd::tanh(c));
    states[t] = h;
  }
  return states;
}

}  // namespace

template <typename T>
Tensor<T> bilstm_encode(const Tensor<T>& inputs, const SemanticCapsParams<T>& params,
                        std::size_t length) {
  if (length == 0 || length > inputs.rows()) {
    throw nd::DimensionError("bilstm_encode: length " + std::to_string(length) + " invalid for input " +
                             nd::to_string(inputs.shape()));
  }
  const std::size_t hidden = params.forward.recurrent_weights.rows();
  Tensor<T> real = length == inputs.rows() ? inputs : nd::slice(inputs, 0, 0, length);

  auto encode = [&](const LstmParams<T>& p, bool reverse) {
    Tensor<T> projected = nd::add_row(nd::matmul(real, p.input_weights), p.bias);
    return nd::concat(run_lstm(projected, p.recurrent_weights, hidden, reverse), 0);
  };
  Tensor<T> states = nd::concat(encode(params.forward, false), encode(params.backward, true), 1);
  if (length == inputs.rows()) return states;
  return nd::concat(states, Tensor<T>::zeros({inputs.rows() - length, 2 * hidden}), 0);
}

template <typename T>
AttentionOutput<T> attend(const Tensor<T>& hidden, const SemanticCapsParams<T>& params,
                          std::size_t length) {
  const std::size_t steps = hidden.rows();
  const std::size_t heads = params.ws2.rows();
  if (length == 0 || length > steps) {
    throw nd::DimensionError("attend: length " + std::to_string(length) + " invalid for " +
                             nd::to_string(hidden.shape()));
  }
  Tensor<T> scores = nd::matmul(params.ws2, nd::tanh(nd::matmul(params.ws1, nd::transpose(hidden))));
  nd::Mask mask{heads, steps, std::vector<std::uint8_t>(heads * steps, 0)};
  for (std::size_t r = 0; r < heads; ++r)
    for (std::size_t t = 0; t < length; ++t) mask.keep[r * steps + t] = 1;
  Tensor<T> attention = nd::row_softmax(scores, &mask);

  std::vector<T> eye(heads * heads, T(0));
  for (std::size_t r = 0; r < heads; ++r) eye[r * heads + r] = T(1);
  Tensor<T> gram = nd::matmul(attention, nd::transpose(attention));
  Tensor<T> penalty = nd::frobenius_sq(nd::sub(gram, Tensor<T>::from({heads, heads}, std::move(eye))));
  return {attention, penalty};
}

template <typename T>
Tensor<T> semantic_vectors(const Tensor<T>& attention, const Tensor<T>& hidden) {
  return nd::matmul(attention, hidden);
}

template <typename T>
SemanticOutput<T> semantic_caps(std::span<const text::WordId> tokens, const ModelParams<T>& params,
                                const InputDropout& dropout) {
  const std::size_t length = real_length(tokens, params.pad_id);
  if (length == 0) throw text::EmptyUtteranceError("utterance has no real tokens");
  SemanticOutput<T> out;
  out.length = length;
  out.hidden = bilstm_encode(embed(tokens, params.embedding, dropout), params.semantic, length);
  auto att = attend(out.hidden, params.semantic, length);
  out.attention = att.attention;
  out.penalty = att.penalty;
  out.semantic = semantic_vectors(out.attention, out.hidden);
  return out;
}

#define INTENTCAPS_INSTANTIATE(T)                                                                   \
  template Tensor<T> embed<T>(std::span<const text::WordId>, const Tensor<T>&, const InputDropout&); \
  template Tensor<T> bilstm_encode<T>(const Tensor<T>&, const SemanticCapsParams<T>&, std::size_t); \
  template AttentionOutput<T> attend<T>(const Tensor<T>&, const SemanticCapsParams<T>&, std::size_t); \
  template Tensor<T> semantic_vectors<T>(const Tensor<T>&, const Tensor<T>&);                       \
  template SemanticOutput<T> semantic_caps<T>(std::span<const text::WordId>, const ModelParams<T>&, \
                                              const InputDropout&);

INTENTCAPS_INSTANTIATE(float)
INTENTCAPS_INSTANTIATE(double)
#undef INTENTCAPS_INSTANTIATE

}  // namespace intentcaps::caps
