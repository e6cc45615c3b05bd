#include "intentcaps/harness/splits.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace intentcaps::harness {

namespace {

// Sample indices grouped by label, each group shuffled.
std::vector<std::vector<std::size_t>> shuffled_classes(const text::Corpus& corpus, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(corpus.labels().size());
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) by_class.at(corpus.samples[i].label).push_back(i);
  std::mt19937_64 rng(seed);
  for (auto& members : by_class) std::shuffle(members.begin(), members.end(), rng);
  return by_class;
}

std::size_t rounded(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
}

}  // namespace

DataSplit stratified_split(const text::Corpus& corpus, double train_fraction, double validation_fraction,
                           std::uint64_t seed) {
  std::vector<std::size_t> train, validation, test;
  for (const auto& members : shuffled_classes(corpus, seed)) {
    const std::size_t n = members.size();
    if (n == 0) continue;
    const std::size_t n_train = std::clamp<std::size_t>(rounded(n, train_fraction), 1, n);
    const std::size_t n_val = std::min(n - n_train, rounded(n, validation_fraction));
    for (std::size_t i = 0; i < n; ++i) {
      auto& part = i < n_train ? train : (i < n_train + n_val ? validation : test);
      part.push_back(members[i]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());
  std::sort(test.begin(), test.end());
  return {corpus.subset(train, text::SplitTag::kTrain), corpus.subset(validation, text::SplitTag::kValidation),
          corpus.subset(test, text::SplitTag::kTest)};
}

std::vector<std::size_t> stratified_folds(const text::Corpus& corpus, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw StratificationError("at least two folds are required");
  std::vector<std::size_t> assignment(corpus.samples.size(), 0);
  const auto by_class = shuffled_classes(corpus, seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < folds) {
      throw StratificationError("class '" + corpus.labels()[c] + "' has " + std::to_string(members.size()) +
                                " samples, fewer than " + std::to_string(folds) + " folds");
    }
    for (std::size_t i = 0; i < members.size(); ++i) assignment[members[i]] = i % folds;
  }
  return assignment;
}

text::Corpus stratified_subsample(const text::Corpus& corpus, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count >= corpus.size()) return corpus;
  const auto by_class = shuffled_classes(corpus, seed);
  // Largest-remainder allocation of `count` across classes.
  std::vector<std::size_t> quota(by_class.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const double exact = static_cast<double>(count) * static_cast<double>(by_class[c].size()) /
                         static_cast<double>(corpus.size());
    quota[c] = static_cast<std::size_t>(exact);
    assigned += quota[c];
    remainders.emplace_back(exact - static_cast<double>(quota[c]), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < count && i < remainders.size(); ++i, ++assigned) ++quota[remainders[i].second];
  std::vector<std::size_t> picked;
  for (std::size_t c = 0; c < by_class.size(); ++c)
    picked.insert(picked.end(), by_class[c].begin(), by_class[c].begin() + quota[c]);
  std::sort(picked.begin(), picked.end());
  return corpus.subset(picked, corpus.split);
}

}  // namespace intentcaps::harness
