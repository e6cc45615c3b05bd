#ifndef INTENTCAPS_HARNESS_METRICS_HPP_
#define INTENTCAPS_HARNESS_METRICS_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace intentcaps::harness {

// Support-weighted classification metrics. confusion is labels.size() rows by
// labels.size() + 1 columns: the last column counts predictions outside the
// label set, so every row sums to that class's support.
struct MetricsReport {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<double> class_f1;
  std::vector<std::size_t> support;
  std::size_t total = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double seconds = 0.0;
};

// truth[i] < labels.size(); predicted[i] may be any index and counts as an
// error when outside the label set. Empty input raises ContractError.
MetricsReport compute_metrics(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted,
                              const std::vector<std::string>& labels);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_METRICS_HPP_
