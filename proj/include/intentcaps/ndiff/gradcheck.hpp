#ifndef INTENTCAPS_NDIFF_GRADCHECK_HPP_
#define INTENTCAPS_NDIFF_GRADCHECK_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "intentcaps/ndiff/tensor.hpp"

namespace intentcaps::ndiff {

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  // Location of the worst entry.
  std::size_t worst_param = 0;
  std::size_t worst_entry = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// |a - n| / max(|a|, |n|), or the plain difference when both magnitudes are
// below `floor`.
inline double gradient_error(double analytic, double numeric, double floor = 1e-8) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  return scale < floor ? diff : diff / scale;
}

// Compares reverse-mode gradients of `loss_fn` against central differences
// (f(x+eps) - f(x-eps)) / 2eps for every entry of every tensor in `params`.
// `loss_fn` must rebuild its graph from the current parameter values on each
// call. Leaves the parameter values unchanged and the grads zeroed.
template <typename T>
GradcheckResult finite_diff_check(const std::function<Tensor<T>()>& loss_fn,
                                  std::vector<Tensor<T>>& params, T epsilon) {
  if (!(epsilon > T(0))) throw ContractError("finite_diff_check: epsilon must be positive");
  auto checked_value = [](const Tensor<T>& loss) {
    const T v = loss.item();
    if (!std::isfinite(v)) throw NumericError("finite_diff_check: loss is not finite");
    return v;
  };

  for (auto& p : params) p.zero_grad();
  Tensor<T> loss = loss_fn();
  checked_value(loss);
  backward(loss);
  std::vector<std::vector<T>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

  GradcheckResult result;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T original = values[i];
      values[i] = original + epsilon;
      const T plus = checked_value(loss_fn());
      values[i] = original - epsilon;
      const T minus = checked_value(loss_fn());
      values[i] = original;
      const double numeric = (static_cast<double>(plus) - static_cast<double>(minus)) /
                             (2.0 * static_cast<double>(epsilon));
      const double err = gradient_error(static_cast<double>(analytic[k][i]), numeric);
      ++result.entries_checked;
      if (err > result.max_relative_error || result.entries_checked == 1) {
        result.max_relative_error = err;
        result.worst_param = k;
        result.worst_entry = i;
        result.worst_analytic = static_cast<double>(analytic[k][i]);
        result.worst_numeric = numeric;
      }
    }
  }
  for (auto& p : params) p.zero_grad();
  return result;
}

}  // namespace intentcaps::ndiff

#endif  // INTENTCAPS_NDIFF_GRADCHECK_HPP_
