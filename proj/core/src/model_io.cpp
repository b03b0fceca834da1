#include "cefl/model_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "cefl/error.hpp"

namespace cefl {
namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic = {'C', 'E', 'F', 'L', 'M', 'D', 'L', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary model format assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError("truncated binary model", 0);
  }
  return v;
}

double get_f64(std::istream& in) {
  double v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError("truncated binary model", 0);
  }
  return v;
}

std::uint32_t activation_code(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return 0;
    case Activation::kSoftmax:
      return 1;
    case Activation::kIdentity:
      return 2;
  }
  return 0;
}

Activation activation_from_code(std::uint32_t c) {
  switch (c) {
    case 0:
      return Activation::kRelu;
    case 1:
      return Activation::kSoftmax;
    case 2:
      return Activation::kIdentity;
    default:
      throw ParseError("unknown activation code " + std::to_string(c), 0);
  }
}

}  // namespace

std::string model_to_json(const ModelParams& m) {
  json layers = json::array();
  for (const LayerParams& p : m.layers()) {
    layers.push_back({{"input_dim", p.spec.input_dim},
                      {"output_dim", p.spec.output_dim},
                      {"activation", std::string(to_string(p.spec.activation))},
                      {"weights", p.weights},
                      {"bias", p.bias}});
  }
  json doc = {{"format", "cefl-model"}, {"version", 1}, {"layers", layers}};
  return doc.dump();
}

ModelParams model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  }
  try {
    if (doc.at("format").get<std::string>() != "cefl-model") {
      throw ParseError("model JSON: unexpected format tag", 0);
    }
    std::vector<LayerParams> layers;
    for (const json& l : doc.at("layers")) {
      LayerParams p;
      p.spec.input_dim = l.at("input_dim").get<std::size_t>();
      p.spec.output_dim = l.at("output_dim").get<std::size_t>();
      p.spec.activation = activation_from_string(l.at("activation").get<std::string>());
      p.weights = l.at("weights").get<std::vector<double>>();
      p.bias = l.at("bias").get<std::vector<double>>();
      layers.push_back(std::move(p));
    }
    return ModelParams(std::move(layers));
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  }
}

void write_model_binary(const ModelParams& m, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, static_cast<std::uint32_t>(m.num_layers()));
  for (const LayerParams& p : m.layers()) {
    put_u32(out, static_cast<std::uint32_t>(p.spec.input_dim));
    put_u32(out, static_cast<std::uint32_t>(p.spec.output_dim));
    put_u32(out, activation_code(p.spec.activation));
  }
  for (const LayerParams& p : m.layers()) {
    for (double w : p.weights) put_f64(out, w);
    for (double b : p.bias) put_f64(out, b);
  }
}

// Guards allocations when reading a corrupt header.
constexpr std::uint64_t kMaxLayerParams = std::uint64_t{1} << 28;
constexpr std::uint32_t kMaxLayers = 1024;

ModelParams read_model_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError("binary model: bad magic", 0);
  }
  const std::uint32_t count = get_u32(in);
  if (count == 0 || count > kMaxLayers) throw ParseError("binary model: bad layer count", 0);
  std::vector<LayerSpec> specs(count);
  for (LayerSpec& s : specs) {
    s.input_dim = get_u32(in);
    s.output_dim = get_u32(in);
    s.activation = activation_from_code(get_u32(in));
    if (static_cast<std::uint64_t>(s.input_dim) * s.output_dim > kMaxLayerParams) {
      throw ParseError("binary model: layer too large", 0);
    }
  }
  try {
    validate_specs(specs);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("binary model: ") + e.what(), 0);
  }
  ModelParams m = ModelParams::zeros(specs);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    LayerParams& p = m.layer(l);
    for (double& w : p.weights) w = get_f64(in);
    for (double& b : p.bias) b = get_f64(in);
  }
  return m;
}

}  // namespace cefl
