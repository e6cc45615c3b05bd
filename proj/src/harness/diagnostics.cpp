#include "intentcaps/harness/diagnostics.hpp"

#include <cmath>
#include <random>

#include "intentcaps/caps/network.hpp"

namespace intentcaps::harness {

ModelGradcheck gradcheck_tiny_model(std::uint64_t seed, double epsilon, const caps::MarginParams& margins,
                                    double kink_gap) {
  caps::ModelDims dims;
  dims.word_dim = 8;
  dims.hidden_dim = 6;
  dims.attention_dim = 5;
  dims.heads = 2;
  dims.num_intents = 3;
  dims.prediction_dim = 4;
  constexpr std::size_t kLength = 5;
  constexpr std::size_t kIterations = 3;
  constexpr std::size_t kMaxDraws = 1000;

  std::vector<std::string> words;
  for (int i = 0; i < 12; ++i) words.push_back("w" + std::to_string(i));
  std::mt19937_64 rng(seed);

  for (std::size_t draw = 1; draw <= kMaxDraws; ++draw) {
    const auto table = text::random_embeddings(words, dims.word_dim, rng());
    auto params = caps::init_model_params<double>(dims, table, rng());
    // Larger transforms move the norms into the range where both hinges act.
    for (double& w : params.detection.transforms.mutable_values()) w *= 8.0;

    ModelGradcheck check;
    std::uniform_int_distribution<std::size_t> word(0, words.size() - 1);
    for (std::size_t t = 0; t < kLength; ++t) check.tokens.push_back(word(rng));
    check.label = rng() % dims.num_intents;
    check.draws = draw;

    auto loss_fn = [&] {
      auto out = caps::forward<double>(check.tokens, params, kIterations);
      return caps::margin_loss(out.activations(), check.label, out.semantic.penalty, margins);
    };
    {
      ndiff::NoGradGuard no_grad;
      check.norms = caps::activation_norms(caps::forward<double>(check.tokens, params, kIterations).activations());
    }
    bool near_kink = false;
    for (double n : check.norms) {
      near_kink = near_kink || std::abs(n - margins.positive_margin) < kink_gap ||
                  std::abs(n - margins.negative_margin) < kink_gap || n < kink_gap;
    }
    if (near_kink) continue;

    auto tensors = params.tensors();
    check.result = ndiff::finite_diff_check<double>(loss_fn, tensors, epsilon);
    check.worst_tensor = params.tensor_names()[check.result.worst_param];
    return check;
  }
  throw ndiff::NumericError("gradcheck_tiny_model: no kink-free instance found");
}

template <typename T>
double offdiagonal_overlap(const ndiff::Tensor<T>& attention) {
  const std::size_t r = attention.rows(), t = attention.cols();
  if (r < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (std::size_t p = 0; p < t; ++p) dot += static_cast<double>(attention.at(i, p) * attention.at(j, p));
      total += std::abs(dot);
    }
  }
  return total / static_cast<double>(r * (r - 1));
}

template double offdiagonal_overlap(const ndiff::Tensor<float>&);
template double offdiagonal_overlap(const ndiff::Tensor<double>&);

double mean_offdiagonal_overlap(const caps::ModelParams<float>& params, const text::Corpus& corpus) {
  if (corpus.empty()) throw ndiff::ContractError("mean_offdiagonal_overlap: empty corpus");
  ndiff::NoGradGuard no_grad;
  double total = 0.0;
  for (const auto& sample : corpus.samples) {
    total += offdiagonal_overlap(caps::semantic_caps<float>(sample.tokens, params).attention);
  }
  return total / static_cast<double>(corpus.size());
}

}  // namespace intentcaps::harness
