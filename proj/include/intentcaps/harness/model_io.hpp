#ifndef INTENTCAPS_HARNESS_MODEL_IO_HPP_
#define INTENTCAPS_HARNESS_MODEL_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "intentcaps/harness/trainer.hpp"

namespace intentcaps::harness {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A trained model plus what inference needs: the vocabulary its embedding rows
// follow and label embeddings for every intent known at training time.
struct SavedModel {
  Params params;
  text::Vocabulary vocab;
  std::vector<std::string> existing_labels;
  std::vector<std::string> emerging_labels;
  std::vector<std::string> intent_names;
  std::vector<double> intent_vectors;  // intent_names.size() x word_dim
  std::size_t routing_iterations = 3;
  double sigma = 4.0;
  std::string config_hash;
};

// Layout: an 8-byte magic, a little-endian u64 header length, a JSON header,
// then every parameter tensor as raw little-endian float32 in
// ModelParams::tensors() order.
void save_model(const std::filesystem::path& path, const SavedModel& model);
SavedModel load_model(const std::filesystem::path& path);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_MODEL_IO_HPP_
