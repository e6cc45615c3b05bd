#include "intentcaps/text/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <stdexcept>

namespace intentcaps::text {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename Number>
bool parse_number(std::string_view field, Number& out) {
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void append_reserved(EmbeddingTable& table, std::uint64_t seed) {
  table.vocab.seal();
  std::mt19937_64 rng(seed);
  const double bound = 0.5 / static_cast<double>(table.dim);
  std::uniform_real_distribution<double> u(-bound, bound);
  for (std::size_t j = 0; j < table.dim; ++j) table.vectors.push_back(u(rng));  // OOV
  table.vectors.insert(table.vectors.end(), table.dim, 0.0);                   // PAD
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim,
                               std::uint64_t seed, const std::unordered_set<std::string>* keep) {
  if (expected_dim == 0) throw std::invalid_argument("embedding dimension must be positive");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("embedding file not found: " + path.string());

  EmbeddingTable table;
  table.dim = expected_dim;
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      std::size_t count = 0, dim = 0;
      if (parse_number(fields[0], count) && parse_number(fields[1], dim) && dim == expected_dim) continue;
    }
    if (fields.size() != expected_dim + 1) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 1 word and " +
                       std::to_string(expected_dim) + " values, got " + std::to_string(fields.size()) +
                       " fields");
    }
    ++records;
    std::string word(fields[0]);
    if (table.vocab.contains(word)) continue;
    if (keep && !keep->contains(word)) continue;
    const std::size_t before = table.vectors.size();
    for (std::size_t j = 1; j <= expected_dim; ++j) {
      double v = 0.0;
      if (!parse_number(fields[j], v)) {
        table.vectors.resize(before);
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number \"" +
                         std::string(fields[j]) + "\"");
      }
      table.vectors.push_back(v);
    }
    table.vocab.add(word);
  }
  if (records == 0) throw EmptySourceError("embedding file has no records: " + path.string());
  append_reserved(table, seed);
  return table;
}

EmbeddingTable random_embeddings(const std::vector<std::string>& words, std::size_t dim,
                                 std::uint64_t seed, double scale) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
  EmbeddingTable table;
  table.dim = dim;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (const auto& w : words) {
    if (table.vocab.contains(w)) continue;
    table.vocab.add(w);
    for (std::size_t j = 0; j < dim; ++j) table.vectors.push_back(u(rng));
  }
  append_reserved(table, seed);
  return table;
}

std::vector<double> intent_embedding(std::string_view label, const EmbeddingTable& table,
                                     IntentPooling pooling) {
  const auto tokens = split_label(label);
  if (tokens.empty()) throw std::invalid_argument("intent label has no tokens: " + std::string(label));
  std::vector<double> out(table.dim, 0.0);
  for (const auto& tok : tokens) {
    auto v = table.vector(table.vocab.lookup(tok));
    for (std::size_t j = 0; j < table.dim; ++j) out[j] += v[j];
  }
  if (pooling == IntentPooling::kMean) {
    for (double& x : out) x /= static_cast<double>(tokens.size());
  }
  return out;
}

void attach_intent_embeddings(EmbeddingTable& table, const std::vector<std::string>& labels,
                              IntentPooling pooling) {
  table.intent_names = labels;
  table.intent_vectors.clear();
  table.intent_vectors.reserve(labels.size() * table.dim);
  for (const auto& label : labels) {
    auto v = intent_embedding(label, table, pooling);
    table.intent_vectors.insert(table.intent_vectors.end(), v.begin(), v.end());
  }
}

}  // namespace intentcaps::text
