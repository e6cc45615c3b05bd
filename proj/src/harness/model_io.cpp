#include "intentcaps/harness/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace intentcaps::harness {

static_assert(std::endian::native == std::endian::little, "model files are written in host byte order");

namespace {

constexpr char kMagic[8] = {'I', 'C', 'A', 'P', 'S', 'M', 'D', '1'};

ndiff::Tensor<float> zeros(ndiff::Shape shape) { return ndiff::Tensor<float>::zeros(std::move(shape), true); }

Params empty_params(const caps::ModelDims& d, std::size_t vocab_size, std::size_t pad_id) {
  Params p;
  p.dims = d;
  p.pad_id = pad_id;
  const std::size_t h = d.hidden_dim, g = 4 * h;
  p.embedding = zeros({vocab_size, d.word_dim});
  for (auto* lstm : {&p.semantic.forward, &p.semantic.backward}) {
    *lstm = {zeros({d.word_dim, g}), zeros({h, g}), zeros({1, g})};
  }
  p.semantic.ws1 = zeros({d.attention_dim, d.state_dim()});
  p.semantic.ws2 = zeros({d.heads, d.attention_dim});
  p.detection.transforms = zeros({d.num_intents, d.heads, d.state_dim(), d.prediction_dim});
  return p;
}

}  // namespace

void save_model(const std::filesystem::path& path, const SavedModel& model) {
  const auto& d = model.params.dims;
  nlohmann::json header;
  header["dims"] = {{"word_dim", d.word_dim},       {"hidden_dim", d.hidden_dim},
                    {"attention_dim", d.attention_dim}, {"heads", d.heads},
                    {"num_intents", d.num_intents}, {"prediction_dim", d.prediction_dim}};
  header["pad_id"] = model.params.pad_id;
  header["vocab"] = model.vocab.words();
  header["existing_labels"] = model.existing_labels;
  header["emerging_labels"] = model.emerging_labels;
  header["intent_names"] = model.intent_names;
  header["intent_vectors"] = model.intent_vectors;
  header["routing_iterations"] = model.routing_iterations;
  header["sigma"] = model.sigma;
  header["config_hash"] = model.config_hash;
  header["tensors"] = model.params.tensor_names();
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelFormatError("cannot write model file " + path.string());
  const std::uint64_t length = text.size();
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : model.params.tensors()) {
    out.write(reinterpret_cast<const char*>(t.values().data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  if (!out) throw ModelFormatError("failed writing model file " + path.string());
}

SavedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open model file " + path.string());
  char magic[8];
  std::uint64_t length = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ModelFormatError(path.string() + ": not a model file");
  }
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw ModelFormatError(path.string() + ": truncated header");

  SavedModel model;
  try {
    const auto header = nlohmann::json::parse(text);
    const auto& jd = header.at("dims");
    caps::ModelDims d;
    d.word_dim = jd.at("word_dim");
    d.hidden_dim = jd.at("hidden_dim");
    d.attention_dim = jd.at("attention_dim");
    d.heads = jd.at("heads");
    d.num_intents = jd.at("num_intents");
    d.prediction_dim = jd.at("prediction_dim");
    d.validate();
    const auto words = header.at("vocab").get<std::vector<std::string>>();
    if (words.size() < 2) throw ModelFormatError(path.string() + ": vocabulary lacks reserved entries");
    for (std::size_t i = 0; i + 2 < words.size(); ++i) model.vocab.add(words[i]);
    model.vocab.seal();
    if (model.vocab.words() != words) throw ModelFormatError(path.string() + ": inconsistent vocabulary");
    model.params = empty_params(d, words.size(), header.at("pad_id"));
    model.existing_labels = header.at("existing_labels").get<std::vector<std::string>>();
    model.emerging_labels = header.at("emerging_labels").get<std::vector<std::string>>();
    model.intent_names = header.at("intent_names").get<std::vector<std::string>>();
    model.intent_vectors = header.at("intent_vectors").get<std::vector<double>>();
    model.routing_iterations = header.at("routing_iterations");
    model.sigma = header.at("sigma");
    model.config_hash = header.at("config_hash");
    if (header.at("tensors").get<std::vector<std::string>>() != model.params.tensor_names()) {
      throw ModelFormatError(path.string() + ": unexpected tensor list");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(path.string() + ": bad header: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(path.string() + ": " + e.what());
  }
  if (model.existing_labels.size() != model.params.dims.num_intents ||
      model.intent_vectors.size() != model.intent_names.size() * model.params.dims.word_dim) {
    throw ModelFormatError(path.string() + ": label metadata does not match the dimensions");
  }
  for (auto& t : model.params.tensors()) {
    auto values = t.mutable_values();
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!in) throw ModelFormatError(path.string() + ": truncated parameters");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ModelFormatError(path.string() + ": trailing bytes");
  return model;
}

}  // namespace intentcaps::harness
