#ifndef INTENTCAPS_TEXT_CORPUS_HPP_
#define INTENTCAPS_TEXT_CORPUS_HPP_

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace intentcaps::text {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyUtteranceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class LabelMappingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using WordId = std::size_t;

// Word -> id map. Ids of file words come first, then OOV, then PAD.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Adds `word` if absent; returns its id either way.
  WordId add(const std::string& word);
  // Appends the reserved OOV and PAD entries. Must be called exactly once,
  // after all regular words.
  void seal();

  bool contains(std::string_view word) const;
  WordId lookup(std::string_view word) const;  // OOV id when unknown
  const std::string& word(WordId id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  WordId oov_id() const { return oov_id_; }
  WordId pad_id() const { return pad_id_; }
  bool sealed() const { return sealed_; }
  const std::vector<std::string>& words() const { return words_; }

  static constexpr std::string_view kOovToken = "<oov>";
  static constexpr std::string_view kPadToken = "<pad>";

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  WordId oov_id_ = 0;
  WordId pad_id_ = 0;
  bool sealed_ = false;
};

// Lowercases, turns punctuation into separators and splits on whitespace.
std::vector<std::string> split_words(std::string_view utterance);

// Word ids of an utterance. Throws EmptyUtteranceError when nothing is left.
std::vector<WordId> tokenize(std::string_view utterance, const Vocabulary& vocab);

// AddToPlaylist -> {add, to, playlist}; also splits on '_', '-' and spaces.
std::vector<std::string> split_label(std::string_view label);

struct LabeledText {
  std::string text;
  std::string intent;
};

struct Sample {
  std::vector<WordId> tokens;
  std::size_t label = 0;  // index into Corpus::labels()
  std::string text;
};

enum class Partition { kExisting, kEmerging };
enum class SplitTag { kAll, kTrain, kValidation, kTest };

std::string_view to_string(SplitTag tag);

struct Corpus {
  std::vector<Sample> samples;
  std::vector<std::string> existing_labels;
  std::vector<std::string> emerging_labels;
  Partition partition = Partition::kExisting;
  SplitTag split = SplitTag::kAll;

  // The label list sample labels index into.
  const std::vector<std::string>& labels() const {
    return partition == Partition::kExisting ? existing_labels : emerging_labels;
  }
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Sample count per label.
  std::vector<std::size_t> label_counts() const;
  // Copy holding only the samples at `indices`, in that order.
  Corpus subset(const std::vector<std::size_t>& indices, SplitTag tag) const;
};

// Reads every train_<Intent>_full.json file below `root`. Each file maps the
// intent name to a list of samples, each sample a list of {"text": ...} spans.
std::vector<LabeledText> read_snips(const std::filesystem::path& root);

// Reads "utterance<TAB>intent" lines. Blank lines are skipped.
std::vector<LabeledText> read_tsv(const std::filesystem::path& path);

// Dispatches on the path: directories are read as the benchmark layout,
// files as TSV.
std::vector<LabeledText> read_dataset(const std::filesystem::path& path);

// Routes utterances to the existing or emerging corpus by label membership and
// tokenizes them. Unknown intents raise LabelMappingError, overlapping label
// lists raise LabelMappingError too.
std::pair<Corpus, Corpus> partition_corpus(const std::vector<LabeledText>& raw,
                                           const std::vector<std::string>& existing_labels,
                                           const std::vector<std::string>& emerging_labels,
                                           const Vocabulary& vocab);

std::pair<Corpus, Corpus> load_snips(const std::filesystem::path& root,
                                     const std::vector<std::string>& existing_labels,
                                     const std::vector<std::string>& emerging_labels,
                                     const Vocabulary& vocab);

}  // namespace intentcaps::text

#endif  // INTENTCAPS_TEXT_CORPUS_HPP_
