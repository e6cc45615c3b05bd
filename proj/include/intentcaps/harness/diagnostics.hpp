#ifndef INTENTCAPS_HARNESS_DIAGNOSTICS_HPP_
#define INTENTCAPS_HARNESS_DIAGNOSTICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "intentcaps/caps/detection_caps.hpp"
#include "intentcaps/ndiff/gradcheck.hpp"
#include "intentcaps/text/corpus.hpp"

namespace intentcaps::harness {

struct ModelGradcheck {
  ndiff::GradcheckResult result;
  std::string worst_tensor;
  std::vector<std::size_t> tokens;
  std::size_t label = 0;
  std::vector<double> norms;  // ||v_k|| at the checked point
  std::size_t draws = 0;      // instances drawn before one cleared the hinge kinks
};

// Finite-difference check of the full margin loss (attention penalty
// included) of a tiny double-precision model: D_W=8, D_H=6, D_A=5, R=2, K=3,
// D_P=4, 5 tokens, 3 routing iterations. Instances whose activation norms
// sit within `kink_gap` of either margin are redrawn.
ModelGradcheck gradcheck_tiny_model(std::uint64_t seed, double epsilon = 1e-4,
                                    const caps::MarginParams& margins = {}, double kink_gap = 1e-2);

// Mean |(A A^T)_ij| over i != j for one R x T attention matrix; 0 when R = 1.
template <typename T>
double offdiagonal_overlap(const ndiff::Tensor<T>& attention);

// offdiagonal_overlap averaged over the utterances of `corpus`.
double mean_offdiagonal_overlap(const caps::ModelParams<float>& params, const text::Corpus& corpus);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_DIAGNOSTICS_HPP_
