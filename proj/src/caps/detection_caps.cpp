#include "intentcaps/caps/detection_caps.hpp"

#include <cmath>
#include <stdexcept>

namespace intentcaps::caps {

namespace nd = ndiff;

void MarginParams::validate() const {
  if (!(0.0 <= negative_margin && negative_margin < positive_margin && positive_margin <= 1.0)) {
    throw nd::ContractError("margins must satisfy 0 <= m- < m+ <= 1");
  }
  if (down_weight < 0.0 || penalty_weight < 0.0) {
    throw nd::ContractError("down-weight and penalty weight must be non-negative");
  }
}

template <typename T>
PredictionVectors<T> prediction_vectors(const Tensor<T>& semantic, const DetectionCapsParams<T>& params) {
  const auto& w = params.transforms;
  if (w.rank() != 4 || semantic.rank() != 2 || semantic.rows() != w.shape()[1] ||
      semantic.cols() != w.shape()[2]) {
    throw nd::DimensionError("prediction_vectors: semantic " + nd::to_string(semantic.shape()) +
                             " does not match transforms " + nd::to_string(w.shape()));
  }
  const std::size_t K = w.shape()[0], R = w.shape()[1], S = w.shape()[2], D = w.shape()[3];
  std::vector<T> out(K * R * D, T(0));
  auto m = semantic.values();
  auto wv = w.values();
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t r = 0; r < R; ++r) {
      T* dst = out.data() + (k * R + r) * D;
      const T* block = wv.data() + (k * R + r) * S * D;
      for (std::size_t s = 0; s < S; ++s) {
        const T coef = m[r * S + s];
        for (std::size_t d = 0; d < D; ++d) dst[d] += coef * block[s * D + d];
      }
    }
  }
  Tensor<T> values = nd::make_op<T>(
      "prediction_vectors", {K * R, D}, std::move(out), {semantic, w}, [K, R, S, D](nd::Node<T>& self) {
        nd::Node<T>& pm = *self.parents[0];
        nd::Node<T>& pw = *self.parents[1];
        for (std::size_t k = 0; k < K; ++k) {
          for (std::size_t r = 0; r < R; ++r) {
            const T* g = self.grad.data() + (k * R + r) * D;
            const std::size_t base = (k * R + r) * S * D;
            for (std::size_t s = 0; s < S; ++s) {
              if (pm.requires_grad) {
                T acc = T(0);
                for (std::size_t d = 0; d < D; ++d) acc += g[d] * pw.values[base + s * D + d];
                pm.grad[r * S + s] += acc;
              }
              if (pw.requires_grad) {
                const T coef = pm.values[r * S + s];
                for (std::size_t d = 0; d < D; ++d) pw.grad[base + s * D + d] += coef * g[d];
              }
            }
          }
        }
      });
  return {values, K, R};
}

template <typename T>
Tensor<T> squash(const Tensor<T>& s) {
  if (s.rank() != 2) throw nd::DimensionError("squash expects a matrix of row vectors, got " + nd::to_string(s.shape()));
  const std::size_t rows = s.rows(), cols = s.cols();
  std::vector<T> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    T n2 = T(0);
    for (std::size_t j = 0; j < cols; ++j) n2 += s[i * cols + j] * s[i * cols + j];
    const T n = std::sqrt(n2);
    const T factor = n / (T(1) + n2);  // == n^2 / (1 + n^2) / n
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = factor * s[i * cols + j];
  }
  return nd::make_op<T>("squash", {rows, cols}, std::move(out), {s}, [rows, cols](nd::Node<T>& self) {
    nd::Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < rows; ++i) {
      const T* x = p.values.data() + i * cols;
      const T* g = self.grad.data() + i * cols;
      T n2 = T(0), xg = T(0);
      for (std::size_t j = 0; j < cols; ++j) {
        n2 += x[j] * x[j];
        xg += x[j] * g[j];
      }
      const T n = std::sqrt(n2);
      const T factor = n / (T(1) + n2);
      // d factor / dn divided by n; the radial term vanishes at the origin.
      const T radial = n > T(0) ? (T(1) - n2) / ((T(1) + n2) * (T(1) + n2) * n) : T(0);
      for (std::size_t j = 0; j < cols; ++j) p.grad[i * cols + j] += factor * g[j] + radial * xg * x[j];
    }
  });
}

std::vector<double> squash(std::span<const double> s) {
  double n2 = 0.0;
  for (double x : s) n2 += x * x;
  std::vector<double> out(s.size(), 0.0);
  if (n2 == 0.0) return out;
  const double factor = n2 / (1.0 + n2) / std::sqrt(n2);
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = factor * s[i];
  return out;
}

template <typename T>
RoutingTrace<T> dynamic_routing(const PredictionVectors<T>& predictions, std::size_t iterations) {
  if (iterations == 0) throw nd::ContractError("dynamic_routing needs at least one iteration");
  const std::size_t K = predictions.intents, R = predictions.heads;
  const Tensor<T>& P = predictions.values;
  if (P.rank() != 2 || P.rows() != K * R) {
    throw nd::DimensionError("dynamic_routing: predictions " + nd::to_string(P.shape()) +
                             " do not hold K*R = " + std::to_string(K * R) + " rows");
  }
  // selector[k][k*R + r] = 1 sums each intent's R rows.
  std::vector<T> sel(K * K * R, T(0));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t r = 0; r < R; ++r) sel[k * K * R + k * R + r] = T(1);
  const Tensor<T> selector = Tensor<T>::from({K, K * R}, sel);
  const Tensor<T> expander = nd::transpose(selector);

  RoutingTrace<T> trace;
  trace.intents = K;
  trace.heads = R;
  trace.iterations = iterations;
  Tensor<T> logits = Tensor<T>::zeros({K, R});
  for (std::size_t it = 0; it < iterations; ++it) {
    trace.logits.push_back(logits);
    Tensor<T> couplings = nd::transpose(nd::row_softmax(nd::transpose(logits)));
    Tensor<T> weighted = nd::mul_col(P, nd::reshape(couplings, {K * R, 1}));
    Tensor<T> pre = nd::matmul(selector, weighted);
    Tensor<T> act = squash(pre);
    Tensor<T> agreement = nd::row_sum(nd::mul(P, nd::matmul(expander, act)));
    logits = nd::add(logits, nd::reshape(agreement, {K, R}));
    trace.couplings.push_back(couplings);
    trace.preactivations.push_back(pre);
    trace.activations.push_back(act);
  }
  trace.final_logits = logits;
  return trace;
}

template <typename T>
Tensor<T> margin_loss(const Tensor<T>& activations, std::size_t true_label, const Tensor<T>& penalty,
                      const MarginParams& margins) {
  margins.validate();
  const std::size_t K = activations.rows();
  if (true_label >= K) {
    throw nd::ContractError("margin_loss: label " + std::to_string(true_label) + " outside " +
                            std::to_string(K) + " intents");
  }
  std::vector<T> present_w(K, T(0)), absent_w(K, static_cast<T>(margins.down_weight));
  present_w[true_label] = T(1);
  absent_w[true_label] = T(0);
  Tensor<T> norms = nd::row_norm(activations);
  Tensor<T> present = nd::square(nd::relu(nd::affine(norms, T(-1), static_cast<T>(margins.positive_margin))));
  Tensor<T> absent = nd::square(nd::relu(nd::affine(norms, T(1), static_cast<T>(-margins.negative_margin))));
  Tensor<T> loss = nd::add(nd::sum(nd::mul(present, Tensor<T>::from({K, 1}, std::move(present_w)))),
                           nd::sum(nd::mul(absent, Tensor<T>::from({K, 1}, std::move(absent_w)))));
  if (margins.penalty_weight == 0.0) return loss;
  return nd::add(loss, nd::affine(nd::reshape(penalty, {1}), static_cast<T>(margins.penalty_weight)));
}

template <typename T>
std::vector<double> activation_norms(const Tensor<T>& activations) {
  const std::size_t rows = activations.rows(), cols = activations.cols();
  std::vector<double> norms(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = static_cast<double>(activations[i * cols + j]);
      acc += x * x;
    }
    norms[i] = std::sqrt(acc);
  }
  return norms;
}

std::size_t argmax_norm(std::span<const double> norms) {
  if (norms.empty()) throw nd::ContractError("argmax over zero candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < norms.size(); ++i) {
    if (norms[i] > norms[best]) best = i;
  }
  return best;
}

#define INTENTCAPS_INSTANTIATE(T)                                                                        \
  template PredictionVectors<T> prediction_vectors<T>(const Tensor<T>&, const DetectionCapsParams<T>&); \
  template Tensor<T> squash<T>(const Tensor<T>&);                                                       \
  template RoutingTrace<T> dynamic_routing<T>(const PredictionVectors<T>&, std::size_t);                \
  template Tensor<T> margin_loss<T>(const Tensor<T>&, std::size_t, const Tensor<T>&, const MarginParams&); \
  template std::vector<double> activation_norms<T>(const Tensor<T>&);

INTENTCAPS_INSTANTIATE(float)
INTENTCAPS_INSTANTIATE(double)
#undef INTENTCAPS_INSTANTIATE

}  // namespace intentcaps::caps
