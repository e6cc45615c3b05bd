#ifndef INTENTCAPS_HARNESS_REPORTS_HPP_
#define INTENTCAPS_HARNESS_REPORTS_HPP_

#include <filesystem>
#include <string>

#include "intentcaps/harness/trainer.hpp"

namespace intentcaps::harness {

// Tab-separated UTF-8 files with a header row. Numbers use the shortest text
// that reads back exactly, so identical runs give identical bytes.

std::string format_number(double value);

void write_metrics(const std::filesystem::path& path, const MetricsReport& report);
void write_confusion(const std::filesystem::path& path, const MetricsReport& report);
void write_curve(const std::filesystem::path& path, const std::vector<EpochRecord>& curve);
void write_zsl_table(const std::filesystem::path& path, const ZslReport& report);

// One row per (utterance, head, position): the attention weight on each token.
void write_attention(const std::filesystem::path& path, const Params& params, const text::Corpus& corpus,
                     const text::Vocabulary& vocab);

// One row per (utterance, intent): the activation norm and vector v_k.
void write_activations(const std::filesystem::path& path, const Params& params, const text::Corpus& corpus,
                       std::size_t iterations);

// One row per (utterance, emerging intent): the norm and vector n_l.
void write_emerging_activations(const std::filesystem::path& path, const Params& params,
                                const text::Corpus& corpus, const caps::SimilarityMatrix& similarity,
                                std::size_t iterations);

// Appends one JSON object line: command, config hash, metrics, wall-clock
// seconds and a UTC timestamp.
void append_summary(const std::filesystem::path& path, const std::string& command, const RunConfig& config,
                    const MetricsReport& metrics);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_REPORTS_HPP_
