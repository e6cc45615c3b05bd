// Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion.
//
//   acceptance            run every criterion
//   acceptance <n>        run criterion n only; exits 77 when it is skipped
//
// Criteria 4 to 6 need the SNIPS benchmark and 300-d pretrained word vectors:
//   INTENTCAPS_SNIPS_DIR    directory holding train_<Intent>_full.json files
//   INTENTCAPS_EMBEDDINGS   word-vector text file ("word v1 ... v300" lines)
// Models trained for criterion 4 are cached under INTENTCAPS_ACCEPTANCE_DIR
// (default: ./acceptance-work) and reused by criterion 5.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "intentcaps/caps/network.hpp"
#include "intentcaps/harness/diagnostics.hpp"
#include "intentcaps/harness/pipeline.hpp"
#include "intentcaps/harness/reports.hpp"
#include "oracles/routing_oracle.hpp"
#include "support/temp_dir.hpp"
#include "support/toy_fixture.hpp"

namespace cp = intentcaps::caps;
namespace hs = intentcaps::harness;
namespace nd = intentcaps::ndiff;
namespace tx = intentcaps::text;
using TensorD = nd::Tensor<double>;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::kPass : Status::kFail, std::move(detail)}; }

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------ 1

Outcome gradient_oracle() {
  double worst = 0.0;
  std::string where;
  std::size_t entries = 0;
  cp::MarginParams standard;
  cp::MarginParams heavy_penalty;
  heavy_penalty.penalty_weight = 1.0;
  for (const auto& margins : {standard, heavy_penalty}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto check = hs::gradcheck_tiny_model(seed, 1e-4, margins);
      entries += check.result.entries_checked;
      if (check.result.max_relative_error >= worst) {
        worst = check.result.max_relative_error;
        where = check.worst_tensor;
      }
    }
  }
  return verdict(worst < 1e-4, "max relative error " + sci(worst) + " (worst in " + where + ") over " +
                                   std::to_string(entries) + " entries, 10 instances, eps 1e-4, bound 1e-4");
}

// ------------------------------------------------------------------ 2

Outcome routing_transcript() {
  const auto votes = oracle::fixed_instance();
  const auto transcript = oracle::route(votes, 3);
  std::vector<double> flat;
  for (const auto& a : votes)
    for (const auto& b : a) flat.insert(flat.end(), b.begin(), b.end());
  const auto trace = cp::dynamic_routing(cp::PredictionVectors<double>{TensorD::from({4, 2}, flat), 2, 2}, 3);
  double worst = 0.0;
  for (std::size_t it = 0; it < 3; ++it) {
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t r = 0; r < 2; ++r) {
        worst = std::max(worst, std::abs(trace.logits[it].at(k, r) - transcript[it].b[k][r]));
        worst = std::max(worst, std::abs(trace.couplings[it].at(k, r) - transcript[it].c[k][r]));
      }
      for (std::size_t d = 0; d < 2; ++d) {
        worst = std::max(worst, std::abs(trace.preactivations[it].at(k, d) - transcript[it].s[k][d]));
        worst = std::max(worst, std::abs(trace.activations[it].at(k, d) - transcript[it].v[k][d]));
      }
    }
  }
  return verdict(worst <= 1e-10, "max |difference| on b, c, s, v over 3 iterations: " + sci(worst) + " (bound 1e-10)");
}

// ------------------------------------------------------------------ 3

struct Tally {
  std::string name;
  int failures = 0;
};

cp::PredictionVectors<double> random_predictions(std::mt19937_64& rng, std::size_t K, std::size_t R,
                                                 std::size_t D) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(K * R * D);
  for (auto& x : v) x = u(rng);
  return {TensorD::from({K * R, D}, v), K, R};
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Outcome invariant_suite() {
  constexpr int kInstances = 100;
  std::mt19937_64 rng(2024);
  std::vector<Tally> tallies;
  auto check = [&](const std::string& name, const std::function<bool()>& property) {
    Tally t{name};
    for (int i = 0; i < kInstances; ++i) t.failures += property() ? 0 : 1;
    tallies.push_back(t);
  };

  check("coupling normalization", [&] {
    const std::size_t K = 1 + rng() % 6, R = 1 + rng() % 4, D = 1 + rng() % 5;
    const auto trace = cp::dynamic_routing(random_predictions(rng, K, R, D), 1 + rng() % 4);
    for (const auto& c : trace.couplings)
      for (std::size_t r = 0; r < R; ++r) {
        double total = 0;
        for (std::size_t k = 0; k < K; ++k) total += c.at(k, r);
        if (std::abs(total - 1.0) > 1e-6) return false;
      }
    return true;
  });

  check("squash bounds, monotonicity, direction", [&] {
    const auto s = random_vector(rng, 1 + rng() % 8, 5.0);
    const auto v = cp::squash(std::span<const double>(s));
    const double ns = norm(s), nv = norm(v);
    if (!(nv >= 0.0 && nv < 1.0)) return false;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (std::abs(v[i] / nv - s[i] / ns) > 1e-12) return false;
    auto longer = s;
    for (auto& x : longer) x *= 1.5;
    return norm(cp::squash(std::span<const double>(longer))) > nv;
  });

  cp::ModelDims dims;
  dims.word_dim = 6;
  dims.hidden_dim = 4;
  dims.attention_dim = 3;
  dims.heads = 3;
  dims.num_intents = 3;
  dims.prediction_dim = 3;
  std::vector<std::string> words;
  for (int i = 0; i < 10; ++i) words.push_back("w" + std::to_string(i));

  check("attention row-stochasticity", [&] {
    const auto table = tx::random_embeddings(words, dims.word_dim, rng());
    const auto params = cp::init_model_params<double>(dims, table, rng());
    std::vector<std::size_t> tokens(1 + rng() % 8);
    for (auto& t : tokens) t = rng() % words.size();
    const auto out = cp::semantic_caps<double>(tokens, params);
    for (std::size_t r = 0; r < out.attention.rows(); ++r) {
      double total = 0;
      for (std::size_t t = 0; t < out.attention.cols(); ++t) {
        if (out.attention.at(r, t) < 0) return false;
        total += out.attention.at(r, t);
      }
      if (std::abs(total - 1.0) > 1e-9) return false;
    }
    return true;
  });

  check("padding invariance", [&] {
    const auto table = tx::random_embeddings(words, dims.word_dim, rng());
    const auto params = cp::init_model_params<double>(dims, table, rng());
    std::vector<std::size_t> tokens(1 + rng() % 6);
    for (auto& t : tokens) t = rng() % words.size();
    auto padded = tokens;
    padded.resize(tokens.size() + 1 + rng() % 5, params.pad_id);
    const auto a = cp::forward<double>(tokens, params, 3);
    const auto b = cp::forward<double>(padded, params, 3);
    for (std::size_t i = 0; i < a.semantic.semantic.size(); ++i)
      if (std::abs(a.semantic.semantic[i] - b.semantic.semantic[i]) > 1e-12) return false;
    for (std::size_t i = 0; i < a.activations().size(); ++i)
      if (std::abs(a.activations()[i] - b.activations()[i]) > 1e-12) return false;
    return true;
  });

  check("Q row-stochasticity", [&] {
    const std::size_t L = 1 + rng() % 4, K = 1 + rng() % 6, D = 1 + rng() % 6;
    const double sigma = 0.5 + static_cast<double>(rng() % 1000) / 100.0;
    const auto q = cp::intent_similarity(random_vector(rng, L * D), random_vector(rng, K * D), D, sigma);
    for (std::size_t l = 0; l < L; ++l) {
      double total = 0;
      for (double x : q.row(l)) {
        if (!(x > 0.0)) return false;
        total += x;
      }
      if (std::abs(total - 1.0) > 1e-12) return false;
    }
    return true;
  });

  check("sigma-limit uniformity", [&] {
    const std::size_t L = 1 + rng() % 4, K = 1 + rng() % 6, D = 1 + rng() % 6;
    const auto q = cp::intent_similarity(random_vector(rng, L * D), random_vector(rng, K * D), D, 1e6);
    for (double x : q.q)
      if (std::abs(x - 1.0 / static_cast<double>(K)) > 1e-6) return false;
    return true;
  });

  check("intent-permutation equivariance", [&] {
    const std::size_t K = 2 + rng() % 4, R = 1 + rng() % 3, D = 2 + rng() % 3;
    const auto p = random_predictions(rng, K, R, D);
    std::vector<std::size_t> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> permuted;
    for (std::size_t k = 0; k < K; ++k) {
      auto rows = p.values.values().subspan(perm[k] * R * D, R * D);
      permuted.insert(permuted.end(), rows.begin(), rows.end());
    }
    const auto a = cp::dynamic_routing(p, 3);
    const auto b = cp::dynamic_routing(cp::PredictionVectors<double>{TensorD::from({K * R, D}, permuted), K, R}, 3);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t d = 0; d < D; ++d)
        if (std::abs(b.output().at(k, d) - a.output().at(perm[k], d)) > 1e-12) return false;
    return true;
  });

  check("emerging-permutation equivariance", [&] {
    const std::size_t K = 2 + rng() % 4, R = 1 + rng() % 3, D = 2 + rng() % 3, L = 2 + rng() % 3, E = 3;
    const auto p = random_predictions(rng, K, R, D);
    const auto trace = cp::dynamic_routing(p, 3);
    const auto emerging = random_vector(rng, L * E), existing = random_vector(rng, K * E);
    std::vector<std::size_t> perm(L);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> shuffled;
    for (std::size_t l = 0; l < L; ++l)
      shuffled.insert(shuffled.end(), emerging.begin() + perm[l] * E, emerging.begin() + (perm[l] + 1) * E);
    const auto a = cp::zero_shot_detect(trace, p, cp::intent_similarity(emerging, existing, E, 2.0), 3);
    const auto b = cp::zero_shot_detect(trace, p, cp::intent_similarity(shuffled, existing, E, 2.0), 3);
    for (std::size_t l = 0; l < L; ++l)
      if (std::abs(b.norms[l] - a.norms[perm[l]]) > 1e-12) return false;
    return true;
  });

  int failed = 0;
  std::string detail;
  for (const auto& t : tallies) {
    failed += t.failures;
    if (t.failures > 0) detail += t.name + " failed " + std::to_string(t.failures) + "/100; ";
  }
  if (failed == 0) detail = std::to_string(tallies.size()) + " properties x 100 randomized instances hold";
  return verdict(failed == 0, detail);
}

// ------------------------------------------------------------------ 4 to 6

struct SnipsPaths {
  std::filesystem::path dataset;
  std::filesystem::path embeddings;
  std::string missing;
};

SnipsPaths snips_paths() {
  SnipsPaths p;
  const char* data = std::getenv("INTENTCAPS_SNIPS_DIR");
  const char* vectors = std::getenv("INTENTCAPS_EMBEDDINGS");
  if (data == nullptr || !std::filesystem::is_directory(data)) p.missing += "INTENTCAPS_SNIPS_DIR ";
  if (vectors == nullptr || !std::filesystem::is_regular_file(vectors)) p.missing += "INTENTCAPS_EMBEDDINGS ";
  if (p.missing.empty()) {
    p.dataset = data;
    p.embeddings = vectors;
  }
  return p;
}

Outcome skipped(const SnipsPaths& p) {
  return {Status::kSkip, "SNIPS data or word vectors unavailable (set " + p.missing + ")"};
}

std::filesystem::path work_dir() {
  const char* env = std::getenv("INTENTCAPS_ACCEPTANCE_DIR");
  return env != nullptr && *env != '\0' ? std::filesystem::path(env) : std::filesystem::path("acceptance-work");
}

// Harness defaults are the SNIPS settings.
hs::RunConfig snips_config(const SnipsPaths& p) {
  hs::RunConfig c;
  c.dataset = p.dataset;
  c.embeddings = p.embeddings;
  c.output_dir = work_dir() / "snips";
  c.seed = 1;
  return c;
}

hs::SavedModel supervised_model(const hs::RunConfig& config, const hs::TrainingData& data) {
  const auto path = config.output_dir / ("model-" + config.hash() + ".bin");
  if (std::filesystem::exists(path)) return hs::load_model(path);
  auto result = hs::train(config, data.table, data.split.train, &data.split.validation, [](const hs::EpochRecord& r) {
    std::cerr << "  epoch " << r.epoch << " loss " << r.mean_loss << " validation " << r.validation_accuracy << "\n";
  });
  auto model = hs::package_model(config, result.params, data.table);
  hs::save_model(path, model);
  return model;
}

Outcome snips_supervised() {
  const auto paths = snips_paths();
  if (!paths.missing.empty()) return skipped(paths);
  const auto config = snips_config(paths);
  const auto data = hs::load_training_data(config);
  const auto model = supervised_model(config, data);
  const auto report = hs::evaluate(model.params, data.split.test, config.routing_iterations);
  return verdict(report.accuracy >= 0.93, "held-out accuracy " + fixed(report.accuracy) + " on " +
                                              std::to_string(report.total) + " utterances (band >= 0.93, published 0.9621)");
}

Outcome snips_zero_shot() {
  const auto paths = snips_paths();
  if (!paths.missing.empty()) return skipped(paths);
  const auto config = snips_config(paths);
  const auto data = hs::load_training_data(config);
  const auto model = supervised_model(config, data);
  const auto q = hs::model_similarity(model, data.emerging, config.sigma);
  const auto report = hs::zsl_evaluate(model.params, data.emerging, q, config.routing_iterations);
  return verdict(report.metrics.accuracy >= 0.70, "zero-shot accuracy " + fixed(report.metrics.accuracy) + " on " +
                                                      std::to_string(report.metrics.total) +
                                                      " utterances (band >= 0.70, published 0.7752)");
}

Outcome regularizer_ablation() {
  const auto paths = snips_paths();
  if (!paths.missing.empty()) return skipped(paths);
  auto config = snips_config(paths);
  config.max_train_utterances = 500;
  const auto data = hs::load_training_data(config);
  double overlap[2];
  const double alphas[2] = {1e-4, 0.0};
  for (int i = 0; i < 2; ++i) {
    config.margins.penalty_weight = alphas[i];
    const auto result = hs::train(config, data.table, data.split.train, &data.split.validation);
    overlap[i] = hs::mean_offdiagonal_overlap(result.params, data.split.validation);
  }
  return verdict(overlap[0] < overlap[1], "mean off-diagonal |AA^T| on validation: alpha=1e-4 " + fixed(overlap[0], 6) +
                                              ", alpha=0 " + fixed(overlap[1], 6));
}

// ------------------------------------------------------------------ 7 and 8

struct ToyRun {
  double train_accuracy = 0.0;
  double emerging_accuracy = 0.0;
  std::vector<double> losses;
  double q_gap = 0.0;     // max |q - onehot| on the MusicPlay row
  double vote_gap = 0.0;  // max |u_MusicPlay - g_PlayMusic| relative to max |g|
  std::string activations;
  std::string emerging_activations;
};

ToyRun toy_run(const testing_support::TempDir& dir, const std::string& tag) {
  const auto dataset = dir.write("toy.tsv", testing_support::toy_tsv());
  auto config = testing_support::toy_config(dataset, dir.path() / tag);
  const auto data = hs::load_training_data(config);
  const auto result = hs::train(config, data.table, data.split.train);

  ToyRun run;
  run.train_accuracy = hs::evaluate(result.params, data.split.train, config.routing_iterations).accuracy;
  for (const auto& r : result.curve) run.losses.push_back(r.mean_loss);

  const auto q = hs::similarity_for(data.emerging, data.table.intent_names, data.table.intent_vectors,
                                    data.table.dim, 0.1);
  // MusicPlay (row 0) shares its words with PlayMusic (column 0).
  for (std::size_t k = 0; k < q.existing; ++k) run.q_gap = std::max(run.q_gap, std::abs(q.at(0, k) - (k == 0 ? 1.0 : 0.0)));
  {
    nd::NoGradGuard no_grad;
    for (const auto& s : data.split.train.samples) {
      const auto net = cp::forward<float>(s.tokens, result.params, config.routing_iterations);
      const auto zs = cp::zero_shot_detect(net.routing, net.predictions, q, config.routing_iterations);
      double scale = 0.0, gap = 0.0;
      for (std::size_t r = 0; r < zs.votes.heads; ++r)
        for (std::size_t d = 0; d < zs.votes.dim(); ++d) {
          const double g = zs.votes.values.at(zs.votes.row(0, r), d);
          scale = std::max(scale, std::abs(g));
          gap = std::max(gap, std::abs(zs.emerging.values.at(zs.emerging.row(0, r), d) - g));
        }
      run.vote_gap = std::max(run.vote_gap, scale > 0 ? gap / scale : gap);
    }
  }
  run.emerging_accuracy = hs::zsl_evaluate(result.params, data.emerging, q, config.routing_iterations).metrics.accuracy;

  hs::write_activations(config.output_dir / "activations.tsv", result.params, data.split.train,
                        config.routing_iterations);
  hs::write_emerging_activations(config.output_dir / "emerging_activations.tsv", result.params, data.emerging, q,
                                 config.routing_iterations);
  run.activations = slurp(config.output_dir / "activations.tsv");
  run.emerging_activations = slurp(config.output_dir / "emerging_activations.tsv");
  return run;
}

Outcome separable_toy() {
  testing_support::TempDir dir;
  const auto run = toy_run(dir, "run");
  const bool ok = run.train_accuracy == 1.0 && run.q_gap <= 1e-3 && run.vote_gap <= 1e-3;
  return verdict(ok, "training accuracy " + fixed(run.train_accuracy) + " after 30 epochs; MusicPlay Q row off one-hot by " +
                         sci(run.q_gap) + " (bound 1e-3) at sigma 0.1; its votes match PlayMusic within " +
                         sci(run.vote_gap) + "; emerging accuracy " + fixed(run.emerging_accuracy));
}

Outcome determinism() {
  testing_support::TempDir dir;
  const auto a = toy_run(dir, "first");
  const auto b = toy_run(dir, "second");
  const bool metrics_equal = a.train_accuracy == b.train_accuracy && a.emerging_accuracy == b.emerging_accuracy &&
                             a.losses == b.losses;
  const bool files_equal = a.activations == b.activations && a.emerging_activations == b.emerging_activations;
  return verdict(metrics_equal && files_equal && !a.activations.empty(),
                 std::string("metrics and loss curve ") + (metrics_equal ? "identical" : "differ") +
                     "; activation exports (" + std::to_string(a.activations.size() + a.emerging_activations.size()) +
                     " bytes) " + (files_equal ? "byte-identical" : "differ"));
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "gradient oracle", gradient_oracle},
      {2, "routing transcript equivalence", routing_transcript},
      {3, "invariant suite", invariant_suite},
      {4, "supervised SNIPS reproduction", snips_supervised},
      {5, "zero-shot SNIPS reproduction", snips_zero_shot},
      {6, "regularizer ablation", regularizer_ablation},
      {7, "separable-toy sanity", separable_toy},
      {8, "determinism", determinism},
  };
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      std::cerr << "usage: " << argv[0] << " [criterion 1-" << criteria.size() << "]\n";
      return 2;
    }
  }
  int failures = 0;
  bool any_skipped = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {Status::kFail, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = outcome.status == Status::kPass ? "PASS" : outcome.status == Status::kFail ? "FAIL" : "SKIP";
    std::cout << "criterion " << c.id << " " << tag << "  " << c.title << ": " << outcome.detail << " ["
              << fixed(seconds, 2) << " s]" << std::endl;
    failures += outcome.status == Status::kFail ? 1 : 0;
    any_skipped = any_skipped || outcome.status == Status::kSkip;
  }
  if (failures > 0) return 1;
  return only != 0 && any_skipped ? 77 : 0;
}
