#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "intentcaps/harness/cli.hpp"
#include "intentcaps/harness/diagnostics.hpp"
#include "intentcaps/harness/pipeline.hpp"
#include "intentcaps/harness/reports.hpp"
#include "support/temp_dir.hpp"
#include "support/toy_fixture.hpp"

namespace hs = intentcaps::harness;
namespace tx = intentcaps::text;
namespace nd = intentcaps::ndiff;
using testing_support::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

tx::Corpus labeled(const std::vector<std::size_t>& labels, std::size_t classes) {
  tx::Corpus c;
  for (std::size_t i = 0; i < classes; ++i) c.existing_labels.push_back("c" + std::to_string(i));
  for (auto l : labels) c.samples.push_back({{0}, l, ""});
  return c;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "intentcaps");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = hs::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

bool same_values(const hs::Params& a, const hs::Params& b) {
  auto ta = a.tensors(), tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (!std::equal(ta[i].values().begin(), ta[i].values().end(), tb[i].values().begin(), tb[i].values().end()))
      return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- config

TEST(RunConfig, DefaultsMatchSnipsSettings) {
  hs::RunConfig c;
  EXPECT_EQ(c.dims.word_dim, 300u);
  EXPECT_EQ(c.dims.hidden_dim, 32u);
  EXPECT_EQ(c.dims.attention_dim, 20u);
  EXPECT_EQ(c.dims.heads, 3u);
  EXPECT_EQ(c.dims.prediction_dim, 10u);
  EXPECT_EQ(c.sigma, 4.0);
  EXPECT_EQ(c.margins.penalty_weight, 1e-4);
  EXPECT_EQ(c.margins.down_weight, 0.5);
  EXPECT_EQ(c.routing_iterations, 3u);
  EXPECT_EQ(c.dropout_keep, 0.8);
  EXPECT_EQ(c.model_dims().num_intents, 5u);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, SetGetRoundTripsEveryKey) {
  hs::RunConfig a;
  hs::RunConfig b;
  b.seed = 99;
  for (const auto& key : hs::RunConfig::keys()) b.set(key, a.get(key));
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(RunConfig, HashTracksValues) {
  hs::RunConfig a, b;
  b.set("sigma", "4.5");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  hs::RunConfig c;
  EXPECT_THROW(c.set("no_such_key", "1"), hs::ConfigError);
  EXPECT_THROW(c.set("epochs", "-3"), hs::ConfigError);
  EXPECT_THROW(c.set("sigma", "abc"), hs::ConfigError);
  EXPECT_THROW(c.set("train_embeddings", "maybe"), hs::ConfigError);
  EXPECT_THROW(c.set("intent_embedding", "max"), hs::ConfigError);
}

TEST(RunConfig, ValidateChecksInvariants) {
  auto broken = [](const char* key, const char* value) {
    hs::RunConfig c;
    c.set(key, value);
    return c;
  };
  EXPECT_THROW(broken("dropout_keep", "0").validate(), hs::ConfigError);
  EXPECT_THROW(broken("dropout_keep", "1.5").validate(), hs::ConfigError);
  EXPECT_THROW(broken("hidden_dim", "0").validate(), hs::ConfigError);
  EXPECT_THROW(broken("negative_margin", "0.95").validate(), hs::ConfigError);
  EXPECT_THROW(broken("sigma", "0").validate(), hs::ConfigError);
  EXPECT_THROW(broken("routing_iterations", "0").validate(), hs::ConfigError);
  EXPECT_THROW(broken("folds", "1").validate(), hs::ConfigError);
  EXPECT_THROW(broken("emerging_labels", "PlayMusic").validate(), hs::ConfigError);
  EXPECT_THROW(broken("existing_labels", "").validate(), hs::ConfigError);
  EXPECT_NO_THROW(broken("dropout_keep", "1").validate());
}

TEST(RunConfig, LoadsFileWithCommentsAndReportsLine) {
  TempDir dir;
  auto c = hs::load_config(dir.write("a.cfg", "# comment\n\nepochs = 7\nexisting_labels=A, B\n"));
  EXPECT_EQ(c.epochs, 7u);
  EXPECT_EQ(c.existing_labels, (std::vector<std::string>{"A", "B"}));
  try {
    hs::load_config(dir.write("b.cfg", "epochs=1\nwhat\n"));
    FAIL() << "expected ConfigError";
  } catch (const hs::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("b.cfg:2"), std::string::npos) << e.what();
  }
}

TEST(RunConfig, OutputDirectoryFromEnvironment) {
  ::setenv("INTENTCAPS_OUTPUT_DIR", "/tmp/from-env", 1);
  EXPECT_EQ(hs::default_output_dir(), std::filesystem::path("/tmp/from-env"));
  ::unsetenv("INTENTCAPS_OUTPUT_DIR");
  EXPECT_EQ(hs::default_output_dir("fallback"), std::filesystem::path("fallback"));
}

// ---------------------------------------------------------------- metrics

TEST(Metrics, PerfectClassifier) {
  auto m = hs::compute_metrics({0, 1, 2, 1}, {0, 1, 2, 1}, {"a", "b", "c"});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, HandConfusionExample) {
  auto m = hs::compute_metrics({0, 0, 1}, {0, 1, 1}, {"a", "b"});
  EXPECT_NEAR(m.accuracy, 2.0 / 3, 1e-15);
  EXPECT_NEAR(m.class_f1[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(m.class_f1[1], 2.0 / 3, 1e-15);
  EXPECT_NEAR(m.f1, (2 * (2.0 / 3) + 1 * (2.0 / 3)) / 3, 1e-15);
  EXPECT_NEAR(m.f1, 0.6667, 1e-4);
  // precision_a = 1, precision_b = 1/2 -> (2*1 + 1*0.5)/3
  EXPECT_NEAR(m.precision, 2.5 / 3, 1e-15);
}

TEST(Metrics, OutOfSetPredictionsAreErrors) {
  auto m = hs::compute_metrics({0, 1}, {7, 1}, {"a", "b"});
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.confusion[0][2], 1u);
  EXPECT_EQ(m.class_recall[0], 0.0);
  EXPECT_FALSE(std::isnan(m.f1));
}

TEST(Metrics, EmptyInputIsContractError) {
  EXPECT_THROW(hs::compute_metrics({}, {}, {"a"}), nd::ContractError);
}

TEST(MetricsProperty, IdentitiesHoldOnRandomPredictions) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 5, total = 1 + rng() % 60;
    std::vector<std::string> labels(n, "x");
    std::vector<std::size_t> truth, pred;
    for (std::size_t i = 0; i < total; ++i) {
      truth.push_back(rng() % n);
      pred.push_back(rng() % (n + 1));
    }
    auto m = hs::compute_metrics(truth, pred, labels);
    std::size_t trace = 0;
    for (std::size_t c = 0; c < n; ++c) {
      trace += m.confusion[c][c];
      std::size_t row = 0;
      for (auto v : m.confusion[c]) row += v;
      EXPECT_EQ(row, m.support[c]);
    }
    EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(trace) / static_cast<double>(total));
    EXPECT_NEAR(m.recall, m.accuracy, 1e-12);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
  }
}

// ---------------------------------------------------------------- splits

TEST(Folds, BalancedClassesGiveOneOfEachPerFold) {
  auto corpus = labeled({0, 1, 2, 0, 1, 2, 0, 1, 2}, 3);
  auto folds = hs::stratified_folds(corpus, 3, 5);
  for (std::size_t f = 0; f < 3; ++f) {
    std::vector<int> per_class(3, 0);
    for (std::size_t i = 0; i < 9; ++i)
      if (folds[i] == f) ++per_class[corpus.samples[i].label];
    EXPECT_EQ(per_class, (std::vector<int>{1, 1, 1}));
  }
  EXPECT_EQ(folds, hs::stratified_folds(corpus, 3, 5));
}

TEST(Folds, TooSmallClassIsStratificationError) {
  EXPECT_THROW(hs::stratified_folds(labeled({0, 0, 0, 1, 1}, 2), 3, 1), hs::StratificationError);
}

TEST(Split, SeventyTenTwentyPerClass) {
  std::vector<std::size_t> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i % 2);
  auto split = hs::stratified_split(labeled(labels, 2), 0.7, 0.1, 4);
  EXPECT_EQ(split.train.label_counts(), (std::vector<std::size_t>{7, 7}));
  EXPECT_EQ(split.validation.label_counts(), (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(split.test.label_counts(), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(split.train.split, tx::SplitTag::kTrain);
}

TEST(Split, SubsampleKeepsProportions) {
  std::vector<std::size_t> labels;
  for (int i = 0; i < 90; ++i) labels.push_back(i < 60 ? 0 : 1);
  auto sub = hs::stratified_subsample(labeled(labels, 2), 30, 2);
  EXPECT_EQ(sub.label_counts(), (std::vector<std::size_t>{20, 10}));
  EXPECT_EQ(hs::stratified_subsample(labeled(labels, 2), 0, 2).size(), 90u);
}

// ---------------------------------------------------------------- optimizer

TEST(Adam, MatchesHandIterates) {
  auto x = nd::Tensor<double>::from({1}, {1.0}, true);
  hs::Adam<double> adam({x}, 0.1);
  // f = x^2: g = 2 at x = 1. First bias-corrected step is lr * g / (|g| + eps).
  x.mutable_grad()[0] = 2.0;
  adam.step();
  EXPECT_NEAR(x[0], 1.0 - 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
  const double x1 = x[0];
  adam.zero_grad();
  x.mutable_grad()[0] = 2.0 * x1;
  adam.step();
  const double m = 0.9 * 0.1 * 2.0 + 0.1 * 2.0 * x1;
  const double v = 0.999 * 0.001 * 4.0 + 0.001 * 4.0 * x1 * x1;
  const double expected = x1 - 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(x[0], expected, 1e-15);
}

TEST(Adam, ZeroGradientDoesNotMove) {
  auto x = nd::Tensor<float>::from({2}, {0.5f, -1.0f}, true);
  hs::Adam<float> adam({x}, 0.01);
  for (int i = 0; i < 5; ++i) adam.step();
  EXPECT_EQ(x[0], 0.5f);
  EXPECT_EQ(x[1], -1.0f);
}

// ---------------------------------------------------------------- training

class ToyTraining : public ::testing::Test {
 protected:
  void SetUp() override {
    config = testing_support::toy_config(dir.write("toy.tsv", testing_support::toy_tsv()), dir.path() / "out");
    data = hs::load_training_data(config);
  }
  TempDir dir;
  hs::RunConfig config;
  hs::TrainingData data;
};

TEST_F(ToyTraining, ReachesFullTrainingAccuracyAndLossDescends) {
  auto result = hs::train(config, data.table, data.split.train);
  ASSERT_EQ(result.curve.size(), 30u);
  EXPECT_LT(result.curve.back().mean_loss, result.curve.front().mean_loss);
  EXPECT_EQ(hs::evaluate(result.params, data.split.train, config.routing_iterations).accuracy, 1.0);
}

TEST_F(ToyTraining, DeterministicInSeed) {
  config.epochs = 5;
  config.dropout_keep = 0.8;
  auto a = hs::train(config, data.table, data.split.train);
  auto b = hs::train(config, data.table, data.split.train);
  EXPECT_TRUE(same_values(a.params, b.params));
  for (std::size_t i = 0; i < a.curve.size(); ++i) EXPECT_EQ(a.curve[i].mean_loss, b.curve[i].mean_loss);
  config.seed += 1;
  auto c = hs::train(config, data.table, data.split.train);
  EXPECT_FALSE(same_values(a.params, c.params));
}

TEST_F(ToyTraining, ZeroEpochsReturnsInitialParameters) {
  config.epochs = 0;
  auto init = intentcaps::caps::init_model_params<float>(config.model_dims(), data.table, config.seed);
  auto result = hs::train(config, data.table, data.split.train);
  EXPECT_TRUE(result.curve.empty());
  EXPECT_TRUE(same_values(result.params, init));
}

TEST_F(ToyTraining, ZeroLearningRateKeepsLossConstant) {
  config.epochs = 4;
  config.learning_rate = 0.0;
  auto result = hs::train(config, data.table, data.split.train);
  for (const auto& r : result.curve) EXPECT_NEAR(r.mean_loss, result.curve.front().mean_loss, 1e-12);
}

TEST_F(ToyTraining, PadRowStaysZeroWhenEmbeddingsTrain) {
  config.epochs = 3;
  config.train_embeddings = true;
  auto result = hs::train(config, data.table, data.split.train);
  const auto& e = result.params.embedding;
  for (std::size_t j = 0; j < e.cols(); ++j) EXPECT_EQ(e.at(result.params.pad_id, j), 0.0f);
}

TEST_F(ToyTraining, BestValidationEpochIsKept) {
  config.train_fraction = 0.6;
  config.validation_fraction = 0.4;
  data = hs::load_training_data(config);
  auto result = hs::train(config, data.table, data.split.train, &data.split.validation);
  double best = -1;
  for (const auto& r : result.curve) best = std::max(best, r.validation_accuracy);
  ASSERT_GE(result.best_epoch, 1u);
  EXPECT_EQ(result.curve[result.best_epoch - 1].validation_accuracy, best);
  EXPECT_EQ(hs::evaluate(result.params, data.split.validation, config.routing_iterations).accuracy, best);
}

TEST_F(ToyTraining, NonFiniteLossRaisesWithLastGoodCheckpoint) {
  auto init = intentcaps::caps::init_model_params<float>(config.model_dims(), data.table, config.seed);
  init.semantic.ws2.mutable_values()[0] = std::numeric_limits<float>::quiet_NaN();
  try {
    hs::train(config, std::move(init), data.split.train);
    FAIL() << "expected DivergenceError";
  } catch (const hs::DivergenceError& e) {
    EXPECT_EQ(e.last_good().dims.num_intents, 2u);
    EXPECT_TRUE(std::isnan(e.last_good().semantic.ws2[0]));
  }
}

TEST_F(ToyTraining, CrossValidationRunsEveryFold) {
  config.epochs = 2;
  auto cv = hs::cross_validate(config, data.table, data.existing);
  ASSERT_EQ(cv.folds.size(), 3u);
  std::size_t total = 0;
  for (const auto& f : cv.folds) total += f.total;
  EXPECT_EQ(total, data.existing.size());
}

TEST_F(ToyTraining, ZeroShotSingleIntentIsTriviallyCorrect) {
  config.epochs = 1;
  auto result = hs::train(config, data.table, data.split.train);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.emerging.size(); ++i)
    if (data.emerging.samples[i].label == 0) keep.push_back(i);
  auto one = data.emerging.subset(keep, tx::SplitTag::kAll);
  one.emerging_labels = {"MusicPlay"};
  auto q = hs::similarity_for(one, data.table.intent_names, data.table.intent_vectors, data.table.dim, 4.0);
  EXPECT_EQ(hs::zsl_evaluate(result.params, one, q, 3).metrics.accuracy, 1.0);
}

TEST_F(ToyTraining, UniformSimilarityIgnoresEmergingNames) {
  config.epochs = 3;
  auto result = hs::train(config, data.table, data.split.train);
  auto q = hs::similarity_for(data.emerging, data.table.intent_names, data.table.intent_vectors, data.table.dim, 1e6);
  auto swapped = data.emerging;
  std::swap(swapped.emerging_labels[0], swapped.emerging_labels[1]);
  auto q2 = hs::similarity_for(swapped, data.table.intent_names, data.table.intent_vectors, data.table.dim, 1e6);
  nd::NoGradGuard no_grad;
  for (const auto& s : data.emerging.samples) {
    auto net = intentcaps::caps::forward<float>(s.tokens, result.params, 3);
    auto a = intentcaps::caps::zero_shot_detect(net.routing, net.predictions, q, 3);
    auto b = intentcaps::caps::zero_shot_detect(net.routing, net.predictions, q2, 3);
    for (std::size_t l = 0; l < 2; ++l) EXPECT_NEAR(a.norms[l], b.norms[l], 1e-6);
  }
}

TEST_F(ToyTraining, ZeroShotRejectsExistingCorpus) {
  config.epochs = 1;
  auto result = hs::train(config, data.table, data.split.train);
  auto q = hs::similarity_for(data.emerging, data.table.intent_names, data.table.intent_vectors, data.table.dim, 4.0);
  EXPECT_THROW(hs::zsl_evaluate(result.params, data.existing, q, 3), nd::ContractError);
  EXPECT_THROW(hs::evaluate(result.params, data.emerging, 3), nd::ContractError);
}

// ---------------------------------------------------------------- model files and reports

TEST_F(ToyTraining, ModelRoundTripsExactly) {
  config.epochs = 2;
  auto result = hs::train(config, data.table, data.split.train);
  const auto path = dir.path() / "m.bin";
  hs::save_model(path, hs::package_model(config, result.params, data.table));
  auto loaded = hs::load_model(path);
  EXPECT_TRUE(same_values(loaded.params, result.params));
  EXPECT_EQ(loaded.vocab.words(), data.table.vocab.words());
  EXPECT_EQ(loaded.params.pad_id, result.params.pad_id);
  EXPECT_EQ(loaded.intent_vectors, data.table.intent_vectors);
  EXPECT_EQ(loaded.config_hash, config.hash());
}

TEST(ModelFile, RejectsForeignAndTruncatedFiles) {
  TempDir dir;
  EXPECT_THROW(hs::load_model(dir.write("x.bin", "definitely not a model")), hs::ModelFormatError);
  EXPECT_THROW(hs::load_model(dir.path() / "missing.bin"), hs::ModelFormatError);
}

TEST_F(ToyTraining, ReportsAreByteIdenticalAcrossRuns) {
  config.epochs = 3;
  std::string first;
  for (int run = 0; run < 2; ++run) {
    auto result = hs::train(config, data.table, data.split.train);
    const auto path = dir.path() / ("act" + std::to_string(run) + ".tsv");
    hs::write_activations(path, result.params, data.split.train, 3);
    if (run == 0) first = slurp(path);
    else EXPECT_EQ(first, slurp(path));
  }
  EXPECT_NE(first.find("utterance\tlabel\tpredicted"), std::string::npos);
}

TEST(AttentionOverlap, HandValues) {
  // Two heads, both uniform over two tokens: every off-diagonal entry is 0.5.
  EXPECT_NEAR(hs::offdiagonal_overlap(nd::Tensor<double>::from({2, 2}, {0.5, 0.5, 0.5, 0.5})), 0.5, 1e-15);
  // Disjoint heads do not overlap.
  EXPECT_EQ(hs::offdiagonal_overlap(nd::Tensor<double>::from({2, 2}, {1, 0, 0, 1})), 0.0);
  EXPECT_EQ(hs::offdiagonal_overlap(nd::Tensor<double>::from({1, 3}, {0.2, 0.3, 0.5})), 0.0);
  // Three heads: (0.6*0.2+0.4*0.8), (0.6*1), (0.2*1) averaged over ordered pairs.
  auto a = nd::Tensor<double>::from({3, 2}, {0.6, 0.4, 0.2, 0.8, 1.0, 0.0});
  EXPECT_NEAR(hs::offdiagonal_overlap(a), 2.0 * (0.44 + 0.6 + 0.2) / 6.0, 1e-15);
}

TEST(Diagnostics, TinyModelGradcheckClearsKinks) {
  auto check = hs::gradcheck_tiny_model(3);
  EXPECT_LT(check.result.max_relative_error, 1e-4);
  EXPECT_EQ(check.tokens.size(), 5u);
  for (double n : check.norms) {
    EXPECT_GT(std::abs(n - 0.9), 1e-2);
    EXPECT_GT(std::abs(n - 0.1), 1e-2);
  }
}

// ---------------------------------------------------------------- command line

TEST(Cli, GradcheckPassesOnSeedSeven) {
  std::string out;
  EXPECT_EQ(cli({"gradcheck", "--seed", "7"}, &out), 0);
  EXPECT_NE(out.find("max relative error"), std::string::npos);
}

TEST(Cli, MissingEmbeddingsFileIsNamed) {
  TempDir dir;
  std::string err;
  const auto data = dir.write("toy.tsv", testing_support::toy_tsv());
  EXPECT_NE(cli({"train", "--dataset", data.string(), "--embeddings", "/no/such/vectors.txt", "--existing_labels",
                 "PlayMusic,GetWeather", "--emerging_labels", "MusicPlay,WeatherGet"},
                nullptr, &err),
            0);
  EXPECT_NE(err.find("/no/such/vectors.txt"), std::string::npos) << err;
}

TEST(Cli, MissingConfigFileIsNamed) {
  std::string err;
  EXPECT_NE(cli({"eval", "--config", "/no/such/run.cfg"}, nullptr, &err), 0);
  EXPECT_NE(err.find("/no/such/run.cfg"), std::string::npos) << err;
}

TEST(Cli, UnknownFlagAndInvalidValueFail) {
  EXPECT_NE(cli({"train", "--no_such_flag", "1"}), 0);
  std::string err;
  EXPECT_NE(cli({"gradcheck", "--dropout_keep", "0"}, nullptr, &err), 0);
  EXPECT_NE(err.find("dropout_keep"), std::string::npos) << err;
  EXPECT_NE(cli({}), 0);
}

TEST(Cli, TrainEvalZeroShotAndExports) {
  TempDir dir;
  const auto data = dir.write("toy.tsv", testing_support::toy_tsv());
  const auto cfg = dir.write("toy.cfg",
                             "word_dim=16\nhidden_dim=8\nattention_dim=6\nheads=2\nprediction_dim=6\n"
                             "dropout_keep=1\nlearning_rate=0.01\nbatch_size=4\nepochs=30\nseed=11\n"
                             "existing_labels=PlayMusic,GetWeather\nemerging_labels=MusicPlay,WeatherGet\n"
                             "train_fraction=0.8\nvalidation_fraction=0\n");
  const std::string out_dir = (dir.path() / "out").string();
  std::string out, err;
  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--dataset", data.string(), "--output_dir", out_dir}, &out, &err),
            0)
      << err;
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "model.bin"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / "curve.tsv"));
  for (const char* cmd : {"eval", "zsl-eval", "export-attention", "export-activations"}) {
    EXPECT_EQ(cli({cmd, "--config", cfg.string(), "--dataset", data.string(), "--output_dir", out_dir}, &out, &err), 0)
        << cmd << ": " << err;
  }
  for (const char* f : {"metrics.tsv", "confusion.tsv", "zsl_intents.tsv", "attention.tsv", "activations.tsv",
                        "emerging_activations.tsv", "summary.jsonl"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / f)) << f;
  }
  const auto summary = slurp(dir.path() / "out" / "summary.jsonl");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 3);
  EXPECT_NE(summary.find("\"config_hash\""), std::string::npos);
}
