#include "intentcaps/harness/cli.hpp"

#include <functional>
#include <iomanip>
#include <map>

#include "CLI11.hpp"
#include "intentcaps/harness/diagnostics.hpp"
#include "intentcaps/harness/pipeline.hpp"
#include "intentcaps/harness/reports.hpp"

namespace intentcaps::harness {

namespace {

constexpr double kGradcheckTolerance = 1e-4;

struct Invocation {
  std::string config_file;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> options;
};

RunConfig resolve(const Invocation& inv, Mode mode) {
  RunConfig config;
  config.output_dir = default_output_dir(config.output_dir);
  if (!inv.config_file.empty()) {
    require_path(inv.config_file, "config file");
    config = load_config(inv.config_file, config);
  }
  for (const auto& [key, option] : inv.options) {
    if (option->count() > 0) config.set(key, inv.overrides.at(key));
  }
  config.mode = mode;
  config.validate();
  return config;
}

void print_metrics(std::ostream& out, const std::string& title, const MetricsReport& m) {
  out << title << ": accuracy " << std::fixed << std::setprecision(4) << m.accuracy << "  precision "
      << m.precision << "  recall " << m.recall << "  f1 " << m.f1 << "  (" << m.total << " utterances, "
      << std::setprecision(1) << m.seconds << " s)\n"
      << std::defaultfloat;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  auto data = load_training_data(config);
  out << "train " << data.split.train.size() << " / validation " << data.split.validation.size() << " / test "
      << data.split.test.size() << " utterances, vocabulary " << data.table.vocab.size() << "\n";
  auto result = train(config, data.table, data.split.train, &data.split.validation, [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << "  loss " << std::setprecision(6) << r.mean_loss;
    if (r.validation_accuracy >= 0) out << "  validation accuracy " << std::setprecision(4) << r.validation_accuracy;
    out << "  (" << std::setprecision(3) << r.seconds << " s)\n" << std::defaultfloat;
  });
  save_model(config.model_path(), package_model(config, result.params, data.table));
  write_curve(config.output_dir / "curve.tsv", result.curve);
  out << "kept epoch " << result.best_epoch << ", model written to " << config.model_path().string() << "\n";
  const auto& held_out = data.split.test.empty() ? data.split.validation : data.split.test;
  if (!held_out.empty()) {
    const auto report = evaluate(result.params, held_out, config.routing_iterations);
    print_metrics(out, std::string(text::to_string(held_out.split)), report);
    write_metrics(config.output_dir / "metrics.tsv", report);
    write_confusion(config.output_dir / "confusion.tsv", report);
    append_summary(config.output_dir / "summary.jsonl", "train", config, report);
  }
  return 0;
}

SavedModel load_configured_model(const RunConfig& config) {
  require_path(config.model_path(), "model file");
  return load_model(config.model_path());
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  const auto model = load_configured_model(config);
  const auto corpus = select_split(config, load_eval_data(config, model).first);
  const auto report = evaluate(model.params, corpus, config.routing_iterations);
  print_metrics(out, config.eval_split, report);
  write_metrics(config.output_dir / "metrics.tsv", report);
  write_confusion(config.output_dir / "confusion.tsv", report);
  append_summary(config.output_dir / "summary.jsonl", "eval", config, report);
  return 0;
}

int cmd_zsl_eval(const RunConfig& config, std::ostream& out) {
  const auto model = load_configured_model(config);
  const auto emerging = load_eval_data(config, model).second;
  if (emerging.empty()) throw ndiff::ContractError("zsl-eval: the dataset holds no emerging-intent utterances");
  const auto similarity = model_similarity(model, emerging, config.sigma);
  const auto report = zsl_evaluate(model.params, emerging, similarity, config.routing_iterations);
  print_metrics(out, "zero-shot", report.metrics);
  for (const auto& s : report.intents) {
    out << "  " << s.label << ": accuracy " << std::fixed << std::setprecision(4) << s.accuracy << "  var(q) "
        << std::setprecision(6) << s.similarity_variance << "  (" << s.support << ")\n" << std::defaultfloat;
  }
  write_metrics(config.output_dir / "zsl_metrics.tsv", report.metrics);
  write_confusion(config.output_dir / "zsl_confusion.tsv", report.metrics);
  write_zsl_table(config.output_dir / "zsl_intents.tsv", report);
  append_summary(config.output_dir / "summary.jsonl", "zsl-eval", config, report.metrics);
  return 0;
}

int cmd_export_attention(const RunConfig& config, std::ostream& out) {
  const auto model = load_configured_model(config);
  const auto corpus = select_split(config, load_eval_data(config, model).first);
  const auto path = config.output_dir / "attention.tsv";
  write_attention(path, model.params, corpus, model.vocab);
  out << "attention for " << corpus.size() << " utterances written to " << path.string() << "\n";
  return 0;
}

int cmd_export_activations(const RunConfig& config, std::ostream& out) {
  const auto model = load_configured_model(config);
  const auto [existing, emerging] = load_eval_data(config, model);
  const auto corpus = select_split(config, existing);
  const auto path = config.output_dir / "activations.tsv";
  write_activations(path, model.params, corpus, config.routing_iterations);
  out << "activations for " << corpus.size() << " utterances written to " << path.string() << "\n";
  if (!emerging.empty()) {
    const auto zpath = config.output_dir / "emerging_activations.tsv";
    write_emerging_activations(zpath, model.params, emerging, model_similarity(model, emerging, config.sigma),
                               config.routing_iterations);
    out << "emerging activations for " << emerging.size() << " utterances written to " << zpath.string() << "\n";
  }
  return 0;
}

int cmd_cross_validate(const RunConfig& config, std::ostream& out) {
  const auto data = load_training_data(config);
  const auto cv = cross_validate(config, data.table, data.existing);
  for (std::size_t f = 0; f < cv.folds.size(); ++f) print_metrics(out, "fold " + std::to_string(f + 1), cv.folds[f]);
  out << "mean accuracy " << std::fixed << std::setprecision(4) << cv.mean_accuracy << "  mean f1 " << cv.mean_f1
      << "\n" << std::defaultfloat;
  return 0;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  const auto check = gradcheck_tiny_model(config.seed, 1e-4, config.margins);
  out << "max relative error " << std::scientific << std::setprecision(3) << check.result.max_relative_error
      << " over " << check.result.entries_checked << " entries (worst in " << check.worst_tensor << ")\n"
      << std::defaultfloat;
  return check.result.max_relative_error < kGradcheckTolerance ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"IntentCapsNet intent detection and zero-shot intent detection"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Command {
    const char* name;
    const char* help;
    Mode mode;
    std::function<int(const RunConfig&, std::ostream&)> run;
  };
  const std::vector<Command> commands{
      {"train", "Train on the existing intents and save the model", Mode::kTrain, cmd_train},
      {"eval", "Evaluate a saved model on existing intents", Mode::kEval, cmd_eval},
      {"zsl-eval", "Zero-shot evaluation on emerging intents", Mode::kZslEval, cmd_zsl_eval},
      {"export-attention", "Write self-attention weights per utterance", Mode::kExport, cmd_export_attention},
      {"export-activations", "Write activation vectors per utterance", Mode::kExport, cmd_export_activations},
      {"cross-validate", "Stratified k-fold cross-validation", Mode::kTrain, cmd_cross_validate},
      {"gradcheck", "Finite-difference check of the full loss on a tiny model", Mode::kTrain, cmd_gradcheck},
  };

  std::vector<Invocation> invocations(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(commands[i].name, commands[i].help);
    auto& inv = invocations[i];
    sub->add_option("--config", inv.config_file, "key=value configuration file");
    for (const auto& key : RunConfig::keys()) inv.options[key] = sub->add_option("--" + key, inv.overrides[key]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!app.got_subcommand(commands[i].name)) continue;
    try {
      return commands[i].run(resolve(invocations[i], commands[i].mode), out);
    } catch (const DivergenceError& e) {
      err << "error: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}

}  // namespace intentcaps::harness
