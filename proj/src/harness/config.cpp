#include "intentcaps/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace intentcaps::harness {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::size_t parse_size(std::string_view value) {
  std::size_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(value) + "'");
  }
  return out;
}

double parse_double(std::string_view value) {
  double out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(value) + "'");
}

std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  std::stringstream in{std::string(value)};
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename M>
Field size_field(M member) {
  return {[member](RunConfig& c, std::string_view v) { c.*member = parse_size(v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> f;
    auto dim = [&](const char* name, std::size_t caps::ModelDims::*member) {
      f[name] = {[member](RunConfig& c, std::string_view v) { c.dims.*member = parse_size(v); },
                 [member](const RunConfig& c) { return std::to_string(c.dims.*member); }};
    };
    dim("word_dim", &caps::ModelDims::word_dim);
    dim("hidden_dim", &caps::ModelDims::hidden_dim);
    dim("attention_dim", &caps::ModelDims::attention_dim);
    dim("heads", &caps::ModelDims::heads);
    dim("prediction_dim", &caps::ModelDims::prediction_dim);
    auto margin = [&](const char* name, double caps::MarginParams::*member) {
      f[name] = {[member](RunConfig& c, std::string_view v) { c.margins.*member = parse_double(v); },
                 [member](const RunConfig& c) { return format_double(c.margins.*member); }};
    };
    margin("down_weight", &caps::MarginParams::down_weight);
    margin("positive_margin", &caps::MarginParams::positive_margin);
    margin("negative_margin", &caps::MarginParams::negative_margin);
    margin("penalty_weight", &caps::MarginParams::penalty_weight);
    auto real = [&](const char* name, double RunConfig::*member) {
      f[name] = {[member](RunConfig& c, std::string_view v) { c.*member = parse_double(v); },
                 [member](const RunConfig& c) { return format_double(c.*member); }};
    };
    real("sigma", &RunConfig::sigma);
    real("dropout_keep", &RunConfig::dropout_keep);
    real("learning_rate", &RunConfig::learning_rate);
    real("train_fraction", &RunConfig::train_fraction);
    real("validation_fraction", &RunConfig::validation_fraction);
    f["routing_iterations"] = size_field(&RunConfig::routing_iterations);
    f["batch_size"] = size_field(&RunConfig::batch_size);
    f["epochs"] = size_field(&RunConfig::epochs);
    f["max_train_utterances"] = size_field(&RunConfig::max_train_utterances);
    f["folds"] = size_field(&RunConfig::folds);
    f["seed"] = {[](RunConfig& c, std::string_view v) { c.seed = parse_size(v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }};
    f["train_embeddings"] = {[](RunConfig& c, std::string_view v) { c.train_embeddings = parse_bool(v); },
                             [](const RunConfig& c) { return std::string(c.train_embeddings ? "true" : "false"); }};
    f["intent_embedding"] = {
        [](RunConfig& c, std::string_view v) {
          if (v == "mean") {
            c.intent_pooling = text::IntentPooling::kMean;
          } else if (v == "sum") {
            c.intent_pooling = text::IntentPooling::kSum;
          } else {
            throw ConfigError("expected mean or sum, got '" + std::string(v) + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.intent_pooling == text::IntentPooling::kMean ? "mean" : "sum");
        }};
    auto path = [&](const char* name, std::filesystem::path RunConfig::*member) {
      f[name] = {[member](RunConfig& c, std::string_view v) { c.*member = std::filesystem::path(v); },
                 [member](const RunConfig& c) { return (c.*member).string(); }};
    };
    path("dataset", &RunConfig::dataset);
    path("embeddings", &RunConfig::embeddings);
    path("output_dir", &RunConfig::output_dir);
    path("model", &RunConfig::model);
    f["mode"] = {[](RunConfig& c, std::string_view v) {
                   if (v == "train") c.mode = Mode::kTrain;
                   else if (v == "eval") c.mode = Mode::kEval;
                   else if (v == "zsl-eval") c.mode = Mode::kZslEval;
                   else if (v == "export") c.mode = Mode::kExport;
                   else throw ConfigError("unknown mode '" + std::string(v) + "'");
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.mode)); }};
    f["existing_labels"] = {[](RunConfig& c, std::string_view v) { c.existing_labels = parse_list(v); },
                            [](const RunConfig& c) { return join(c.existing_labels); }};
    f["emerging_labels"] = {[](RunConfig& c, std::string_view v) { c.emerging_labels = parse_list(v); },
                            [](const RunConfig& c) { return join(c.emerging_labels); }};
    f["eval_split"] = {[](RunConfig& c, std::string_view v) { c.eval_split = std::string(v); },
                       [](const RunConfig& c) { return c.eval_split; }};
    return f;
  }();
  return table;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kTrain: return "train";
    case Mode::kEval: return "eval";
    case Mode::kZslEval: return "zsl-eval";
    case Mode::kExport: return "export";
  }
  return "train";
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  try {
    it->second.set(*this, trim(value));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::string RunConfig::get(std::string_view key) const {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second.get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, field] : fields()) out.push_back(name);
    return out;
  }();
  return names;
}

void RunConfig::validate() const {
  try {
    model_dims().validate();
    margins.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) throw ConfigError("dropout_keep must lie in (0, 1]");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (routing_iterations == 0) throw ConfigError("routing_iterations must be at least 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(train_fraction > 0.0 && validation_fraction >= 0.0 && train_fraction + validation_fraction <= 1.0)) {
    throw ConfigError("train_fraction and validation_fraction must be a valid partition of 1");
  }
  if (eval_split != "train" && eval_split != "validation" && eval_split != "test" && eval_split != "all") {
    throw ConfigError("eval_split must be train, validation, test or all");
  }
  if (folds < 2) throw ConfigError("folds must be at least 2");
  for (const auto& e : existing_labels) {
    for (const auto& z : emerging_labels) {
      if (e == z) throw ConfigError("label '" + e + "' is both existing and emerging");
    }
  }
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + "=" + field.get(*this) + "\n";
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path RunConfig::model_path() const {
  return model.empty() ? output_dir / "model.bin" : model;
}

caps::ModelDims RunConfig::model_dims() const {
  caps::ModelDims d = dims;
  d.num_intents = existing_labels.size();
  return d;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    try {
      base.set(trim(std::string_view(body).substr(0, eq)), std::string_view(body).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

std::filesystem::path default_output_dir(const std::filesystem::path& fallback) {
  const char* env = std::getenv("INTENTCAPS_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? std::filesystem::path(env) : fallback;
}

}  // namespace intentcaps::harness
