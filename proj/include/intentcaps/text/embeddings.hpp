#ifndef INTENTCAPS_TEXT_EMBEDDINGS_HPP_
#define INTENTCAPS_TEXT_EMBEDDINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "intentcaps/text/corpus.hpp"

namespace intentcaps::text {

enum class IntentPooling { kMean, kSum };

// Word vectors plus per-intent label embeddings. Rows are stored row-major.
struct EmbeddingTable {
  Vocabulary vocab;
  std::size_t dim = 0;
  std::vector<double> vectors;         // vocab.size() x dim
  std::vector<std::string> intent_names;
  std::vector<double> intent_vectors;  // intent_names.size() x dim

  std::span<const double> vector(WordId id) const {
    return std::span<const double>(vectors).subspan(id * dim, dim);
  }
  std::span<const double> intent_vector(std::size_t i) const {
    return std::span<const double>(intent_vectors).subspan(i * dim, dim);
  }
};

// Parses "word v1 ... vD" lines. An optional "count dim" header line is
// skipped. Duplicate words keep their first vector. When `keep` is non-null,
// words outside it are dropped after parsing their line. Appends OOV (uniform
// in [-0.5/D, 0.5/D] drawn with `seed`) and PAD (zero).
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim,
                               std::uint64_t seed,
                               const std::unordered_set<std::string>* keep = nullptr);

// Table for `words` without pretrained vectors: each row uniform in
// [-scale, scale]. OOV and PAD follow the same rules as load_embeddings.
EmbeddingTable random_embeddings(const std::vector<std::string>& words, std::size_t dim,
                                 std::uint64_t seed, double scale = 0.5);

// Mean (or sum) of the vectors of the label's camel-case tokens; unknown
// tokens use the OOV vector.
std::vector<double> intent_embedding(std::string_view label, const EmbeddingTable& table,
                                     IntentPooling pooling = IntentPooling::kMean);

// Fills table.intent_names / intent_vectors for the given labels, in order.
void attach_intent_embeddings(EmbeddingTable& table, const std::vector<std::string>& labels,
                              IntentPooling pooling = IntentPooling::kMean);

}  // namespace intentcaps::text

#endif  // INTENTCAPS_TEXT_EMBEDDINGS_HPP_
