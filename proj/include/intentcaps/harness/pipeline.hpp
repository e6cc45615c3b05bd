#ifndef INTENTCAPS_HARNESS_PIPELINE_HPP_
#define INTENTCAPS_HARNESS_PIPELINE_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "intentcaps/harness/model_io.hpp"
#include "intentcaps/harness/splits.hpp"

namespace intentcaps::harness {

class MissingFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws MissingFileError("<what> not found: <path>") unless `path` exists.
void require_path(const std::filesystem::path& path, const std::string& what);

struct TrainingData {
  text::EmbeddingTable table;  // with intent embeddings for existing + emerging labels
  text::Corpus existing;
  text::Corpus emerging;
  DataSplit split;             // of `existing`
};

// Reads config.dataset, builds the embedding table (pretrained vectors from
// config.embeddings restricted to corpus and label words, or seeded random
// vectors when no file is configured), partitions by label and splits the
// existing intents. Training data is subsampled when max_train_utterances > 0.
TrainingData load_training_data(const RunConfig& config);

// Reads config.dataset against a trained model's vocabulary and label sets.
// Returns {existing, emerging}; emerging is empty when the data holds none.
std::pair<text::Corpus, text::Corpus> load_eval_data(const RunConfig& config, const SavedModel& model);

// The part of the existing-intent corpus named by config.eval_split.
text::Corpus select_split(const RunConfig& config, const text::Corpus& existing);

SavedModel package_model(const RunConfig& config, const Params& params, const text::EmbeddingTable& table);

// Q between the emerging corpus labels and the model's existing labels, from
// the label embeddings stored with the model.
caps::SimilarityMatrix model_similarity(const SavedModel& model, const text::Corpus& emerging, double sigma);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_PIPELINE_HPP_
