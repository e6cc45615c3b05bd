#include "intentcaps/harness/reports.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>

#include "json.hpp"

namespace intentcaps::harness {

namespace {

std::ofstream open_report(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

template <typename T>
void write_vector(std::ostream& out, std::span<const T> values) {
  for (T v : values) out << '\t' << format_number(static_cast<double>(v));
}

// Stand-in for tab and newline inside utterance text.
std::string clean(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_metrics(const std::filesystem::path& path, const MetricsReport& report) {
  auto out = open_report(path);
  out << "class\tprecision\trecall\tf1\tsupport\n";
  for (std::size_t c = 0; c < report.labels.size(); ++c) {
    out << report.labels[c] << '\t' << format_number(report.class_precision[c]) << '\t'
        << format_number(report.class_recall[c]) << '\t' << format_number(report.class_f1[c]) << '\t'
        << report.support[c] << '\n';
  }
  out << "weighted\t" << format_number(report.precision) << '\t' << format_number(report.recall) << '\t'
      << format_number(report.f1) << '\t' << report.total << '\n';
  out << "accuracy\t" << format_number(report.accuracy) << "\t\t\t" << report.total << '\n';
}

void write_confusion(const std::filesystem::path& path, const MetricsReport& report) {
  auto out = open_report(path);
  out << "true\\predicted";
  for (const auto& l : report.labels) out << '\t' << l;
  out << "\tother\n";
  for (std::size_t c = 0; c < report.labels.size(); ++c) {
    out << report.labels[c];
    for (std::size_t v : report.confusion[c]) out << '\t' << v;
    out << '\n';
  }
}

void write_curve(const std::filesystem::path& path, const std::vector<EpochRecord>& curve) {
  auto out = open_report(path);
  out << "epoch\tmean_loss\tvalidation_accuracy\n";
  for (const auto& r : curve) {
    out << r.epoch << '\t' << format_number(r.mean_loss) << '\t'
        << (r.validation_accuracy < 0 ? std::string("NA") : format_number(r.validation_accuracy)) << '\n';
  }
}

void write_zsl_table(const std::filesystem::path& path, const ZslReport& report) {
  auto out = open_report(path);
  out << "intent\tsupport\taccuracy\tsimilarity_variance";
  for (const auto& k : report.existing_labels) out << "\tq_" << k;
  out << '\n';
  for (std::size_t l = 0; l < report.intents.size(); ++l) {
    const auto& s = report.intents[l];
    out << s.label << '\t' << s.support << '\t' << format_number(s.accuracy) << '\t'
        << format_number(s.similarity_variance);
    for (double q : report.similarity.row(l)) out << '\t' << format_number(q);
    out << '\n';
  }
}

void write_attention(const std::filesystem::path& path, const Params& params, const text::Corpus& corpus,
                     const text::Vocabulary& vocab) {
  ndiff::NoGradGuard no_grad;
  auto out = open_report(path);
  out << "utterance\tlabel\thead\tposition\ttoken\tweight\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sample = corpus.samples[i];
    const auto sem = caps::semantic_caps<float>(sample.tokens, params);
    for (std::size_t r = 0; r < sem.attention.rows(); ++r) {
      for (std::size_t t = 0; t < sem.length; ++t) {
        out << i << '\t' << corpus.labels()[sample.label] << '\t' << r << '\t' << t << '\t'
            << clean(vocab.word(sample.tokens[t])) << '\t' << format_number(sem.attention.at(r, t)) << '\n';
      }
    }
  }
}

void write_activations(const std::filesystem::path& path, const Params& params, const text::Corpus& corpus,
                       std::size_t iterations) {
  ndiff::NoGradGuard no_grad;
  auto out = open_report(path);
  out << "utterance\tlabel\tpredicted\tintent\tnorm\tvector\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sample = corpus.samples[i];
    const auto net = caps::forward<float>(sample.tokens, params, iterations);
    const auto& v = net.activations();
    const auto norms = caps::activation_norms(v);
    const std::size_t predicted = caps::argmax_norm(norms);
    for (std::size_t k = 0; k < v.rows(); ++k) {
      out << i << '\t' << corpus.labels()[sample.label] << '\t' << corpus.existing_labels[predicted] << '\t'
          << corpus.existing_labels[k] << '\t' << format_number(norms[k]);
      write_vector<float>(out, v.values().subspan(k * v.cols(), v.cols()));
      out << '\n';
    }
  }
}

void write_emerging_activations(const std::filesystem::path& path, const Params& params,
                                const text::Corpus& corpus, const caps::SimilarityMatrix& similarity,
                                std::size_t iterations) {
  ndiff::NoGradGuard no_grad;
  auto out = open_report(path);
  out << "utterance\tlabel\tpredicted\tintent\tnorm\tvector\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& sample = corpus.samples[i];
    const auto net = caps::forward<float>(sample.tokens, params, iterations);
    const auto zs = caps::zero_shot_detect(net.routing, net.predictions, similarity, iterations);
    const auto& n = zs.routing.output();
    for (std::size_t l = 0; l < n.rows(); ++l) {
      out << i << '\t' << corpus.labels()[sample.label] << '\t' << corpus.emerging_labels[zs.predicted] << '\t'
          << corpus.emerging_labels[l] << '\t' << format_number(zs.norms[l]);
      write_vector<float>(out, n.values().subspan(l * n.cols(), n.cols()));
      out << '\n';
    }
  }
}

void append_summary(const std::filesystem::path& path, const std::string& command, const RunConfig& config,
                    const MetricsReport& metrics) {
  nlohmann::json record;
  record["command"] = command;
  record["config_hash"] = config.hash();
  record["seed"] = config.seed;
  record["samples"] = metrics.total;
  record["accuracy"] = metrics.accuracy;
  record["precision"] = metrics.precision;
  record["recall"] = metrics.recall;
  record["f1"] = metrics.f1;
  record["seconds"] = metrics.seconds;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  record["timestamp"] = stamp;
  auto out = open_report(path, std::ios::app);
  out << record.dump() << '\n';
}

}  // namespace intentcaps::harness
