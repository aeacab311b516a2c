#include "quantcert/model_io.hpp"

#include "quantcert/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace quantcert {

using nlohmann::json;

std::string save_model(const Network& net) {
  require_valid(net);
  json doc;
  doc["input_dim"] = static_cast<std::int64_t>(net.input_dim);
  json layers = json::array();
  for (const Layer& l : net.layers) {
    json jl;
    jl["activation"] = to_string(l.activation);
    json rows = json::array();
    for (Index r = 0; r < l.weights.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
      rows.push_back(std::move(row));
    }
    jl["weights"] = std::move(rows);
    json bias = json::array();
    for (Index r = 0; r < l.bias.size(); ++r) bias.push_back(l.bias[r]);
    jl["bias"] = std::move(bias);
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  return doc.dump();
}

namespace {

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* name : allowed) {
      if (it.key() == name) { known = true; break; }
    }
    if (!known) {
      throw Error("schema-violation",
                  std::string("unknown field '") + it.key() + "' in " + where);
    }
  }
}

double number_field(const json& v, const char* field) {
  if (!v.is_number()) {
    throw Error("schema-violation", std::string(field) + " must contain numbers");
  }
  return v.get<double>();
}

}  // namespace

Network load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "byte " << e.byte << ": " << e.what();
    throw Error("parse-error", os.str());
  }
  if (!doc.is_object()) throw Error("schema-violation", "top level must be an object");
  reject_unknown_fields(doc, {"input_dim", "layers"}, "model");
  if (!doc.contains("input_dim") || !doc["input_dim"].is_number_integer())
    throw Error("schema-violation", "input_dim must be an integer");
  if (!doc.contains("layers") || !doc["layers"].is_array())
    throw Error("schema-violation", "layers must be an array");

  Network net;
  net.input_dim = doc["input_dim"].get<std::int64_t>();
  for (const json& jl : doc["layers"]) {
    if (!jl.is_object()) throw Error("schema-violation", "each layer must be an object");
    reject_unknown_fields(jl, {"weights", "bias", "activation"}, "layer");
    if (!jl.contains("weights") || !jl["weights"].is_array() || jl["weights"].empty())
      throw Error("schema-violation", "weights must be a non-empty array of rows");
    if (!jl.contains("bias") || !jl["bias"].is_array())
      throw Error("schema-violation", "bias must be an array");
    if (!jl.contains("activation") || !jl["activation"].is_string())
      throw Error("schema-violation", "activation must be a string");

    Layer layer;
    try {
      layer.activation = activation_from_string(jl["activation"].get<std::string>());
    } catch (const Error&) {
      throw Error("schema-violation",
                  "activation must be one of relu|tanh|sigmoid|linear");
    }
    const json& rows = jl["weights"];
    const std::size_t ncols = rows[0].is_array() ? rows[0].size() : 0;
    if (ncols == 0) throw Error("schema-violation", "weight rows must be non-empty arrays");
    layer.weights.resize(static_cast<Index>(rows.size()), static_cast<Index>(ncols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || rows[r].size() != ncols)
        throw Error("schema-violation", "weight rows must all have the same length");
      for (std::size_t c = 0; c < ncols; ++c)
        layer.weights(static_cast<Index>(r), static_cast<Index>(c)) =
            number_field(rows[r][c], "weights");
    }
    layer.bias.resize(static_cast<Index>(jl["bias"].size()));
    for (std::size_t r = 0; r < jl["bias"].size(); ++r)
      layer.bias[static_cast<Index>(r)] = number_field(jl["bias"][r], "bias");
    net.layers.push_back(std::move(layer));
  }

  std::vector<ValidationIssue> issues = validate(net);
  if (!issues.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < issues.size(); ++i) {
      if (i) os << "; ";
      os << issues[i].detail;
    }
    throw Error(issues.front().code, os.str());
  }
  return net;
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc{}) throw std::logic_error("to_chars failed");
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io-error", "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("io-error", "failed writing '" + path + "'");
}

void save_model_file(const Network& net, const std::string& path) {
  write_text_file(path, save_model(net));
}

Network load_model_file(const std::string& path) {
  return load_model(read_text_file(path));
}

}  // namespace quantcert
