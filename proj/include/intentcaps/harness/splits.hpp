#ifndef INTENTCAPS_HARNESS_SPLITS_HPP_
#define INTENTCAPS_HARNESS_SPLITS_HPP_

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "intentcaps/text/corpus.hpp"

namespace intentcaps::harness {

class StratificationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DataSplit {
  text::Corpus train;
  text::Corpus validation;
  text::Corpus test;
};

// Per class, shuffles with `seed` and takes round(n * train_fraction) samples
// for training (at least one), round(n * validation_fraction) for validation,
// and the rest for testing. Index order inside each part follows the corpus.
DataSplit stratified_split(const text::Corpus& corpus, double train_fraction, double validation_fraction,
                           std::uint64_t seed);

// Fold index of every sample. Each class is shuffled with `seed` and dealt
// round-robin, so per-class fold sizes differ by at most one. Classes with
// fewer samples than folds raise StratificationError.
std::vector<std::size_t> stratified_folds(const text::Corpus& corpus, std::size_t folds, std::uint64_t seed);

// First `count` samples of a seeded per-class-proportional subsample; returns
// the corpus unchanged when count is 0 or not smaller than its size.
text::Corpus stratified_subsample(const text::Corpus& corpus, std::size_t count, std::uint64_t seed);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_SPLITS_HPP_
