#include "intentcaps/harness/metrics.hpp"

#include "intentcaps/ndiff/tensor.hpp"

namespace intentcaps::harness {

MetricsReport compute_metrics(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                              const std::vector<std::string>& labels) {
  if (truth.empty()) throw ndiff::ContractError("compute_metrics: no samples");
  if (truth.size() != predicted.size()) throw ndiff::ContractError("compute_metrics: length mismatch");
  const std::size_t n = labels.size();
  MetricsReport m;
  m.labels = labels;
  m.total = truth.size();
  m.confusion.assign(n, std::vector<std::size_t>(n + 1, 0));
  std::vector<std::size_t> predicted_count(n, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n) throw ndiff::ContractError("compute_metrics: true label outside label set");
    const std::size_t p = predicted[i] < n ? predicted[i] : n;
    ++m.confusion[truth[i]][p];
    if (p < n) ++predicted_count[p];
    if (p == truth[i]) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  m.support.assign(n, 0);
  m.class_precision.assign(n, 0.0);
  m.class_recall.assign(n, 0.0);
  m.class_f1.assign(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t v : m.confusion[c]) m.support[c] += v;
    const double tp = static_cast<double>(m.confusion[c][c]);
    if (predicted_count[c] > 0) m.class_precision[c] = tp / static_cast<double>(predicted_count[c]);
    if (m.support[c] > 0) m.class_recall[c] = tp / static_cast<double>(m.support[c]);
    const double pr = m.class_precision[c] + m.class_recall[c];
    if (pr > 0.0) m.class_f1[c] = 2.0 * m.class_precision[c] * m.class_recall[c] / pr;
    const double w = static_cast<double>(m.support[c]) / static_cast<double>(m.total);
    m.precision += w * m.class_precision[c];
    m.recall += w * m.class_recall[c];
    m.f1 += w * m.class_f1[c];
  }
  return m;
}

}  // namespace intentcaps::harness
