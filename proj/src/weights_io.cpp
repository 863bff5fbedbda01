#include "hjpoisson/weights_io.hpp"

#include "hjpoisson/errors.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace hjpoisson {

using nlohmann::json;

namespace {

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) throw FormatError(std::string("weight file: missing field '") + field + "'", field);
  return *it;
}

std::vector<double> real_array(const json& j, const std::string& field) {
  if (!j.is_array()) throw FormatError("weight file: '" + field + "' must be an array", field);
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& v : j) {
    if (!v.is_number()) throw FormatError("weight file: non-numeric entry in '" + field + "'", field);
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw FormatError("weight file: non-finite entry in '" + field + "'", field);
    out.push_back(d);
  }
  return out;
}

}  // namespace

std::string weights_to_string(const GeneratingFunctionNet& net) {
  validate_layer_sizes(net.layer_sizes);
  json doc;
  doc["format_version"] = kWeightFormatVersion;
  doc["layer_sizes"] = net.layer_sizes;
  doc["activation"] = "tanh";
  doc["structural_t_factor"] = true;
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < net.params.weights.size(); ++l) {
    const auto& w = net.params.weights[l];
    json flat = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        if (!std::isfinite(w(i, j))) throw FormatError("refusing to save non-finite weight", "weights");
        flat.push_back(w(i, j));
      }
    weights.push_back(std::move(flat));
    json b = json::array();
    for (Eigen::Index i = 0; i < net.params.biases[l].size(); ++i) {
      if (!std::isfinite(net.params.biases[l][i])) throw FormatError("refusing to save non-finite bias", "biases");
      b.push_back(net.params.biases[l][i]);
    }
    biases.push_back(std::move(b));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  if (net.seed) doc["seed"] = *net.seed;
  if (net.training_config_digest) doc["training_config_digest"] = *net.training_config_digest;
  return doc.dump(1) + "\n";
}

GeneratingFunctionNet weights_from_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("weight file: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("weight file: top level must be an object");

  const json& version = require(doc, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kWeightFormatVersion)
    throw FormatError("weight file: unsupported format_version", "format_version");
  const json& activation = require(doc, "activation");
  if (!activation.is_string() || activation.get<std::string>() != "tanh")
    throw FormatError("weight file: activation must be \"tanh\"", "activation");
  const json& factor = require(doc, "structural_t_factor");
  if (!factor.is_boolean() || !factor.get<bool>())
    throw FormatError("weight file: structural_t_factor must be true", "structural_t_factor");

  GeneratingFunctionNet net;
  const json& sizes = require(doc, "layer_sizes");
  if (!sizes.is_array()) throw FormatError("weight file: layer_sizes must be an array", "layer_sizes");
  for (const json& s : sizes) {
    if (!s.is_number_integer()) throw FormatError("weight file: layer_sizes must be integers", "layer_sizes");
    net.layer_sizes.push_back(s.get<int>());
  }
  try {
    validate_layer_sizes(net.layer_sizes);
  } catch (const std::invalid_argument& e) {
    throw DimensionError(std::string("weight file: ") + e.what(), "layer_sizes");
  }
  net.params = Parameters::zeros(net.layer_sizes);
  const std::size_t layers = net.params.weights.size();

  const json& weights = require(doc, "weights");
  const json& biases = require(doc, "biases");
  if (!weights.is_array() || weights.size() != layers)
    throw DimensionError("weight file: expected " + std::to_string(layers) + " weight matrices", "weights");
  if (!biases.is_array() || biases.size() != layers)
    throw DimensionError("weight file: expected " + std::to_string(layers) + " bias vectors", "biases");

  for (std::size_t l = 0; l < layers; ++l) {
    auto& w = net.params.weights[l];
    const std::vector<double> flat = real_array(weights[l], "weights");
    if (flat.size() != static_cast<std::size_t>(w.size()))
      throw DimensionError("weight file: layer " + std::to_string(l) + " weights have " +
                               std::to_string(flat.size()) + " entries, expected " +
                               std::to_string(w.rows()) + "x" + std::to_string(w.cols()),
                           "weights");
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = flat[k++];

    const std::vector<double> b = real_array(biases[l], "biases");
    if (b.size() != static_cast<std::size_t>(net.params.biases[l].size()))
      throw DimensionError("weight file: layer " + std::to_string(l) + " bias has " +
                               std::to_string(b.size()) + " entries, expected " +
                               std::to_string(net.params.biases[l].size()),
                           "biases");
    for (std::size_t i = 0; i < b.size(); ++i) net.params.biases[l][static_cast<Eigen::Index>(i)] = b[i];
  }

  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) throw FormatError("weight file: seed must be a nonnegative integer", "seed");
    net.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("training_config_digest"); it != doc.end()) {
    if (!it->is_string())
      throw FormatError("weight file: training_config_digest must be a string", "training_config_digest");
    net.training_config_digest = it->get<std::string>();
  }
  return net;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void save_weights(const GeneratingFunctionNet& net, const std::filesystem::path& path) {
  write_text_file(path, weights_to_string(net));
}

GeneratingFunctionNet load_weights(const std::filesystem::path& path) {
  return weights_from_string(read_text_file(path));
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace hjpoisson
