#include "intentcaps/caps/params.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace intentcaps::caps {

void ModelDims::validate() const {
  if (word_dim == 0 || hidden_dim == 0 || attention_dim == 0 || heads == 0 || num_intents == 0 ||
      prediction_dim == 0) {
    throw std::invalid_argument("all model dimensions must be positive");
  }
}

namespace {

template <typename T>
Tensor<T> glorot(std::mt19937_64& rng, ndiff::Shape shape, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<T> values(ndiff::numel(shape));
  for (auto& v : values) v = static_cast<T>(u(rng));
  return Tensor<T>::from(std::move(shape), std::move(values), true);
}

template <typename T>
LstmParams<T> init_lstm(std::mt19937_64& rng, std::size_t input_dim, std::size_t hidden_dim) {
  const std::size_t gates = 4 * hidden_dim;
  LstmParams<T> p;
  p.input_weights = glorot<T>(rng, {input_dim, gates}, input_dim, gates);
  p.recurrent_weights = glorot<T>(rng, {hidden_dim, gates}, hidden_dim, gates);
  std::vector<T> bias(gates, T(0));
  for (std::size_t j = hidden_dim; j < 2 * hidden_dim; ++j) bias[j] = T(1);
  p.bias = Tensor<T>::from({1, gates}, std::move(bias), true);
  return p;
}

template <typename T>
Tensor<T> fresh(const Tensor<T>& t) {
  return Tensor<T>::from(t.shape(), std::vector<T>(t.values().begin(), t.values().end()), t.requires_grad());
}

template <typename U, typename T>
Tensor<U> convert(const Tensor<T>& t) {
  std::vector<U> values(t.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<U>(t[i]);
  return Tensor<U>::from(t.shape(), std::move(values), t.requires_grad());
}

}  // namespace

template <typename T>
std::vector<Tensor<T>> ModelParams<T>::tensors() const {
  return {embedding,
          semantic.forward.input_weights,
          semantic.forward.recurrent_weights,
          semantic.forward.bias,
          semantic.backward.input_weights,
          semantic.backward.recurrent_weights,
          semantic.backward.bias,
          semantic.ws1,
          semantic.ws2,
          detection.transforms};
}

template <typename T>
std::vector<std::string> ModelParams<T>::tensor_names() const {
  return {"embedding",     "lstm_fw.input", "lstm_fw.recurrent", "lstm_fw.bias", "lstm_bw.input",
          "lstm_bw.recurrent", "lstm_bw.bias", "attention.ws1", "attention.ws2", "detection.transforms"};
}

template <typename T>
ModelParams<T> ModelParams<T>::clone() const {
  ModelParams out;
  out.dims = dims;
  out.pad_id = pad_id;
  out.embedding = fresh(embedding);
  out.semantic.forward = {fresh(semantic.forward.input_weights), fresh(semantic.forward.recurrent_weights),
                          fresh(semantic.forward.bias)};
  out.semantic.backward = {fresh(semantic.backward.input_weights),
                           fresh(semantic.backward.recurrent_weights), fresh(semantic.backward.bias)};
  out.semantic.ws1 = fresh(semantic.ws1);
  out.semantic.ws2 = fresh(semantic.ws2);
  out.detection.transforms = fresh(detection.transforms);
  return out;
}

template <typename T>
void ModelParams<T>::copy_values_from(const ModelParams& other) {
  auto dst = tensors();
  auto src = other.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].shape() != src[i].shape()) throw ndiff::DimensionError("parameter shapes differ");
    std::copy(src[i].values().begin(), src[i].values().end(), dst[i].mutable_values().begin());
  }
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out;
  out.dims = dims;
  out.pad_id = pad_id;
  out.embedding = convert<U>(embedding);
  out.semantic.forward = {convert<U>(semantic.forward.input_weights),
                          convert<U>(semantic.forward.recurrent_weights), convert<U>(semantic.forward.bias)};
  out.semantic.backward = {convert<U>(semantic.backward.input_weights),
                           convert<U>(semantic.backward.recurrent_weights),
                           convert<U>(semantic.backward.bias)};
  out.semantic.ws1 = convert<U>(semantic.ws1);
  out.semantic.ws2 = convert<U>(semantic.ws2);
  out.detection.transforms = convert<U>(detection.transforms);
  return out;
}

template <typename T>
ModelParams<T> init_model_params(const ModelDims& dims, const text::EmbeddingTable& table,
                                 std::uint64_t seed) {
  dims.validate();
  if (table.dim != dims.word_dim) {
    throw ndiff::DimensionError("embedding table has dimension " + std::to_string(table.dim) +
                                ", model expects " + std::to_string(dims.word_dim));
  }
  if (!table.vocab.sealed()) throw std::invalid_argument("embedding vocabulary is not sealed");
  std::mt19937_64 rng(seed);
  ModelParams<T> p;
  p.dims = dims;
  p.pad_id = table.vocab.pad_id();

  std::vector<T> emb(table.vectors.size());
  for (std::size_t i = 0; i < emb.size(); ++i) emb[i] = static_cast<T>(table.vectors[i]);
  p.embedding = Tensor<T>::from({table.vocab.size(), dims.word_dim}, std::move(emb), true);

  p.semantic.forward = init_lstm<T>(rng, dims.word_dim, dims.hidden_dim);
  p.semantic.backward = init_lstm<T>(rng, dims.word_dim, dims.hidden_dim);
  p.semantic.ws1 = glorot<T>(rng, {dims.attention_dim, dims.state_dim()}, dims.state_dim(), dims.attention_dim);
  p.semantic.ws2 = glorot<T>(rng, {dims.heads, dims.attention_dim}, dims.attention_dim, dims.heads);
  p.detection.transforms = glorot<T>(
      rng, {dims.num_intents, dims.heads, dims.state_dim(), dims.prediction_dim}, dims.state_dim(),
      dims.prediction_dim);
  return p;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;
template ModelParams<float> init_model_params<float>(const ModelDims&, const text::EmbeddingTable&,
                                                     std::uint64_t);
template ModelParams<double> init_model_params<double>(const ModelDims&, const text::EmbeddingTable&,
                                                       std::uint64_t);

}  // namespace intentcaps::caps
