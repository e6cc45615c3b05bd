#ifndef INTENTCAPS_HARNESS_CONFIG_HPP_
#define INTENTCAPS_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "intentcaps/caps/detection_caps.hpp"
#include "intentcaps/caps/params.hpp"
#include "intentcaps/text/embeddings.hpp"

namespace intentcaps::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Mode { kTrain, kEval, kZslEval, kExport };

std::string_view to_string(Mode mode);

// Everything a run needs. Keys in config files and `--key value` flags use
// the names listed by RunConfig::keys().
struct RunConfig {
  caps::ModelDims dims;  // num_intents follows existing_labels
  caps::MarginParams margins;
  double sigma = 4.0;
  std::size_t routing_iterations = 3;
  double dropout_keep = 0.8;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  bool train_embeddings = false;
  text::IntentPooling intent_pooling = text::IntentPooling::kMean;

  std::filesystem::path dataset;
  std::filesystem::path embeddings;  // empty: random vectors for corpus words
  std::filesystem::path output_dir = "out";
  std::filesystem::path model;       // empty: <output_dir>/model.bin
  Mode mode = Mode::kTrain;

  std::vector<std::string> existing_labels{"SearchCreativeWork", "GetWeather", "BookRestaurant",
                                           "PlayMusic", "SearchScreeningEvent"};
  std::vector<std::string> emerging_labels{"AddToPlaylist", "RateBook"};

  double train_fraction = 0.7;
  double validation_fraction = 0.1;
  std::string eval_split = "test";  // train | validation | test | all
  std::size_t max_train_utterances = 0;  // 0 keeps the whole training split
  std::size_t folds = 3;

  // Sets one field from its textual form. Unknown keys and unparsable values
  // raise ConfigError.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  // Sorted key=value lines; the basis of hash().
  std::string canonical() const;
  // FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  std::filesystem::path model_path() const;
  caps::ModelDims model_dims() const;
};

// Applies `key=value` lines from `path` on top of `base`. Blank lines and
// lines starting with '#' are ignored.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Output directory from INTENTCAPS_OUTPUT_DIR, or `fallback` when unset.
std::filesystem::path default_output_dir(const std::filesystem::path& fallback = "out");

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_CONFIG_HPP_
