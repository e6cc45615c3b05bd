#ifndef INTENTCAPS_TESTS_ROUTING_ORACLE_HPP_
#define INTENTCAPS_TESTS_ROUTING_ORACLE_HPP_

// Straight-line transcription of routing-by-agreement on nested std::vectors.
// Shares no code with the library: its own softmax, squash and dot product.

#include <cmath>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Grid = std::vector<std::vector<double>>;  // [k][r]
using Votes = std::vector<std::vector<Vec>>;    // [k][r][d]

struct Iteration {
  Grid b;  // logits entering the iteration
  Grid c;
  std::vector<Vec> s;
  std::vector<Vec> v;
};

inline Vec squash(const Vec& s) {
  double n2 = 0;
  for (double x : s) n2 += x * x;
  Vec out(s.size(), 0.0);
  if (n2 == 0) return out;
  const double n = std::sqrt(n2);
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = (n2 / (1 + n2)) * (s[i] / n);
  return out;
}

inline std::vector<Iteration> route(const Votes& p, int iterations) {
  const std::size_t K = p.size(), R = p[0].size(), D = p[0][0].size();
  Grid b(K, std::vector<double>(R, 0.0));
  std::vector<Iteration> transcript;
  for (int it = 0; it < iterations; ++it) {
    Iteration rec;
    rec.b = b;
    // for each semantic capsule r, c_r = softmax(b_r) over intents
    Grid c(K, std::vector<double>(R, 0.0));
    for (std::size_t r = 0; r < R; ++r) {
      double denom = 0;
      for (std::size_t k = 0; k < K; ++k) denom += std::exp(b[k][r]);
      for (std::size_t k = 0; k < K; ++k) c[k][r] = std::exp(b[k][r]) / denom;
    }
    // s_k = sum_r c_kr p_k|r
    std::vector<Vec> s(K, Vec(D, 0.0));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t d = 0; d < D; ++d) s[k][d] += c[k][r] * p[k][r][d];

    std::vector<Vec> v(K);
    for (std::size_t k = 0; k < K; ++k) v[k] = squash(s[k]);
    // b_kr += p_k|r . v_k
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t r = 0; r < R; ++r) {
        double dot = 0;
        for (std::size_t d = 0; d < D; ++d) dot += p[k][r][d] * v[k][d];
        b[k][r] += dot;
      }
    rec.c = c;
    rec.s = s;
    rec.v = v;
    transcript.push_back(rec);
  }
  return transcript;
}

// The fixed K=2, R=2, D_P=2 instance used by the routing tests.
inline Votes fixed_instance() {
  return {{{0.3, -0.2}, {0.5, 0.1}}, {{-0.4, 0.6}, {0.2, 0.25}}};
}

}  // namespace oracle

#endif  // INTENTCAPS_TESTS_ROUTING_ORACLE_HPP_
