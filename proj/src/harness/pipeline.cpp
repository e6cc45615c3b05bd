#include "intentcaps/harness/pipeline.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace intentcaps::harness {

void require_path(const std::filesystem::path& path, const std::string& what) {
  if (path.empty()) throw MissingFileError(what + " path is not set");
  if (!std::filesystem::exists(path)) throw MissingFileError(what + " not found: " + path.string());
}

namespace {

std::set<std::string> needed_words(const std::vector<text::LabeledText>& raw, const RunConfig& config) {
  std::set<std::string> words;
  for (const auto& item : raw)
    for (auto& w : text::split_words(item.text)) words.insert(std::move(w));
  for (const auto* labels : {&config.existing_labels, &config.emerging_labels})
    for (const auto& label : *labels)
      for (auto& w : text::split_label(label)) words.insert(std::move(w));
  return words;
}

std::vector<std::string> all_labels(const RunConfig& config) {
  std::vector<std::string> labels = config.existing_labels;
  labels.insert(labels.end(), config.emerging_labels.begin(), config.emerging_labels.end());
  return labels;
}

}  // namespace

TrainingData load_training_data(const RunConfig& config) {
  config.validate();
  require_path(config.dataset, "dataset");
  const auto raw = text::read_dataset(config.dataset);
  if (raw.empty()) throw text::EmptySourceError("dataset " + config.dataset.string() + " holds no utterances");
  const auto words = needed_words(raw, config);

  TrainingData data;
  if (config.embeddings.empty()) {
    data.table = text::random_embeddings(std::vector<std::string>(words.begin(), words.end()), config.dims.word_dim,
                                         config.seed);
  } else {
    require_path(config.embeddings, "embeddings file");
    const std::unordered_set<std::string> keep(words.begin(), words.end());
    data.table = text::load_embeddings(config.embeddings, config.dims.word_dim, config.seed, &keep);
  }
  text::attach_intent_embeddings(data.table, all_labels(config), config.intent_pooling);
  std::tie(data.existing, data.emerging) =
      text::partition_corpus(raw, config.existing_labels, config.emerging_labels, data.table.vocab);
  if (data.existing.empty()) throw text::EmptySourceError("dataset holds no utterances of the existing intents");
  data.split = stratified_split(data.existing, config.train_fraction, config.validation_fraction, config.seed);
  data.split.train = stratified_subsample(data.split.train, config.max_train_utterances, config.seed);
  return data;
}

std::pair<text::Corpus, text::Corpus> load_eval_data(const RunConfig& config, const SavedModel& model) {
  require_path(config.dataset, "dataset");
  return text::partition_corpus(text::read_dataset(config.dataset), model.existing_labels, model.emerging_labels,
                                model.vocab);
}

text::Corpus select_split(const RunConfig& config, const text::Corpus& existing) {
  if (config.eval_split == "all") return existing;
  auto split = stratified_split(existing, config.train_fraction, config.validation_fraction, config.seed);
  if (config.eval_split == "train") return stratified_subsample(split.train, config.max_train_utterances, config.seed);
  if (config.eval_split == "validation") return split.validation;
  return split.test;
}

SavedModel package_model(const RunConfig& config, const Params& params, const text::EmbeddingTable& table) {
  SavedModel model;
  model.params = params.clone();
  model.vocab = table.vocab;
  model.existing_labels = config.existing_labels;
  model.emerging_labels = config.emerging_labels;
  model.intent_names = table.intent_names;
  model.intent_vectors = table.intent_vectors;
  model.routing_iterations = config.routing_iterations;
  model.sigma = config.sigma;
  model.config_hash = config.hash();
  return model;
}

caps::SimilarityMatrix model_similarity(const SavedModel& model, const text::Corpus& emerging, double sigma) {
  return similarity_for(emerging, model.intent_names, model.intent_vectors, model.params.dims.word_dim, sigma);
}

}  // namespace intentcaps::harness
