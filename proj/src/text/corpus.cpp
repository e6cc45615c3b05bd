#include "intentcaps/text/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace intentcaps::text {

namespace {

bool is_separator(unsigned char ch) {
  return std::isspace(ch) || (ch < 0x80 && std::ispunct(ch));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6) extra = 1;
    else if ((c >> 4) == 0xE) extra = 2;
    else if ((c >> 3) == 0x1E) extra = 3;
    else return false;
    if (i + extra >= s.size() && extra > 0) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

// Some benchmark files are Latin-1 encoded.
std::string latin1_to_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size() + s.size() / 8);
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) {
      out.push_back(ch);
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

}  // namespace

WordId Vocabulary::add(const std::string& word) {
  if (sealed_) throw std::logic_error("vocabulary is sealed");
  auto [it, inserted] = index_.emplace(word, words_.size());
  if (inserted) words_.push_back(word);
  return it->second;
}

void Vocabulary::seal() {
  if (sealed_) throw std::logic_error("vocabulary is already sealed");
  oov_id_ = words_.size();
  words_.emplace_back(kOovToken);
  pad_id_ = words_.size();
  words_.emplace_back(kPadToken);
  sealed_ = true;
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

WordId Vocabulary::lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? oov_id_ : it->second;
}

std::vector<std::string> split_words(std::string_view utterance) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : utterance) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_separator(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<WordId> tokenize(std::string_view utterance, const Vocabulary& vocab) {
  auto words = split_words(utterance);
  if (words.empty()) {
    throw EmptyUtteranceError("utterance has no tokens: \"" + std::string(utterance) + "\"");
  }
  std::vector<WordId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(vocab.lookup(w));
  return ids;
}

std::vector<std::string> split_label(std::string_view label) {
  std::vector<std::string> parts;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) parts.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < label.size(); ++i) {
    const auto c = static_cast<unsigned char>(label[i]);
    if (c == '_' || c == '-' || std::isspace(c)) {
      flush();
      continue;
    }
    if (std::isupper(c) && !current.empty()) {
      const auto prev = static_cast<unsigned char>(label[i - 1]);
      const bool next_lower = i + 1 < label.size() && std::islower(static_cast<unsigned char>(label[i + 1]));
      // "PlayMusic" splits before M; "TVShow" splits before S.
      if (std::islower(prev) || std::isdigit(prev) || (std::isupper(prev) && next_lower)) flush();
    }
    current.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return parts;
}

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kAll: return "all";
    case SplitTag::kTrain: return "train";
    case SplitTag::kValidation: return "validation";
    case SplitTag::kTest: return "test";
  }
  return "unknown";
}

std::vector<std::size_t> Corpus::label_counts() const {
  std::vector<std::size_t> counts(labels().size(), 0);
  for (const auto& s : samples) ++counts.at(s.label);
  return counts;
}

Corpus Corpus::subset(const std::vector<std::size_t>& indices, SplitTag tag) const {
  Corpus out;
  out.existing_labels = existing_labels;
  out.emerging_labels = emerging_labels;
  out.partition = partition;
  out.split = tag;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(samples.at(i));
  return out;
}

std::vector<LabeledText> read_snips(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw std::runtime_error("dataset directory not found: " + root.string());
  static const std::regex kFileName(R"(train_([A-Za-z0-9]+)_full\.json)");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, m, kFileName)) files.push_back(entry.path());
  }
  if (files.empty()) throw EmptySourceError("no train_<Intent>_full.json files below " + root.string());
  std::sort(files.begin(), files.end());

  std::vector<LabeledText> out;
  for (const auto& file : files) {
    std::string raw = read_file(file);
    if (!valid_utf8(raw)) raw = latin1_to_utf8(raw);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(file.string() + ": top level is not an object");
    for (const auto& [intent, samples] : doc.items()) {
      if (!samples.is_array()) throw ParseError(file.string() + ": samples of " + intent + " are not a list");
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& sample = samples[i];
        const std::string where = file.string() + ": " + intent + " sample " + std::to_string(i);
        if (!sample.is_object() || !sample.contains("data") || !sample["data"].is_array()) {
          throw ParseError(where + " has no span list");
        }
        std::string text;
        for (const auto& span : sample["data"]) {
          if (!span.is_object() || !span.contains("text") || !span["text"].is_string()) {
            throw ParseError(where + " has a span without text");
          }
          text += span["text"].get<std::string>();
        }
        out.push_back({std::move(text), intent});
      }
    }
  }
  return out;
}

std::vector<LabeledText> read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dataset file not found: " + path.string());
  std::vector<LabeledText> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected two tab-separated columns");
    }
    std::string intent = line.substr(tab + 1);
    if (intent.empty()) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": empty intent");
    out.push_back({line.substr(0, tab), std::move(intent)});
  }
  if (out.empty()) throw EmptySourceError("no samples in " + path.string());
  return out;
}

std::vector<LabeledText> read_dataset(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return read_snips(path);
  return read_tsv(path);
}

std::pair<Corpus, Corpus> partition_corpus(const std::vector<LabeledText>& raw,
                                           const std::vector<std::string>& existing_labels,
                                           const std::vector<std::string>& emerging_labels,
                                           const Vocabulary& vocab) {
  std::unordered_map<std::string, std::pair<Partition, std::size_t>> route;
  for (std::size_t i = 0; i < existing_labels.size(); ++i) {
    if (!route.emplace(existing_labels[i], std::pair{Partition::kExisting, i}).second) {
      throw LabelMappingError("intent listed twice: " + existing_labels[i]);
    }
  }
  for (std::size_t i = 0; i < emerging_labels.size(); ++i) {
    if (!route.emplace(emerging_labels[i], std::pair{Partition::kEmerging, i}).second) {
      throw LabelMappingError("intent is both existing and emerging (or listed twice): " + emerging_labels[i]);
    }
  }

  Corpus existing, emerging;
  for (Corpus* c : {&existing, &emerging}) {
    c->existing_labels = existing_labels;
    c->emerging_labels = emerging_labels;
  }
  emerging.partition = Partition::kEmerging;

  for (const auto& item : raw) {
    auto it = route.find(item.intent);
    if (it == route.end()) throw LabelMappingError("intent not in the existing or emerging list: " + item.intent);
    Sample s;
    s.tokens = tokenize(item.text, vocab);
    s.label = it->second.second;
    s.text = item.text;
    (it->second.first == Partition::kExisting ? existing : emerging).samples.push_back(std::move(s));
  }
  return {std::move(existing), std::move(emerging)};
}

std::pair<Corpus, Corpus> load_snips(const std::filesystem::path& root,
                                     const std::vector<std::string>& existing_labels,
                                     const std::vector<std::string>& emerging_labels,
                                     const Vocabulary& vocab) {
  return partition_corpus(read_snips(root), existing_labels, emerging_labels, vocab);
}

}  // namespace intentcaps::text
