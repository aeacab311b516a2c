#include "quantcert/quantization.hpp"

#include "quantcert/error.hpp"
#include "quantcert/model_io.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace quantcert {

using nlohmann::json;

QuantizationScheme QuantizationScheme::affine(double scale, std::int64_t zero_point,
                                              int bits) {
  QuantizationScheme s;
  s.kind = SchemeKind::affine;
  s.scale = scale;
  s.zero_point = zero_point;
  s.bits = bits;
  check_scheme(s);
  return s;
}

QuantizationScheme QuantizationScheme::truncation(int digits) {
  QuantizationScheme s;
  s.kind = SchemeKind::truncation;
  s.digits = digits;
  check_scheme(s);
  return s;
}

namespace {

std::int64_t signed_min(int bits) { return -(std::int64_t{1} << (bits - 1)); }
std::int64_t signed_max(int bits) { return (std::int64_t{1} << (bits - 1)) - 1; }

// 10^d for d in [0, 12], exact by construction.
constexpr double kPow10[13] = {1.0,  1e1, 1e2, 1e3, 1e4,  1e5, 1e6,
                               1e7,  1e8, 1e9, 1e10, 1e11, 1e12};

}  // namespace

void check_scheme(const QuantizationScheme& s) {
  if (s.kind == SchemeKind::affine) {
    if (!(s.scale > 0.0) || !std::isfinite(s.scale))
      throw Error("invalid-scheme", "affine scale must be positive and finite");
    if (s.bits < 2 || s.bits > 16)
      throw Error("invalid-scheme", "affine bits must be in [2, 16]");
    if (s.zero_point < signed_min(s.bits) || s.zero_point > signed_max(s.bits))
      throw Error("invalid-scheme", "zero_point outside the signed range of bits");
  } else {
    if (s.digits < 0 || s.digits > 12)
      throw Error("invalid-scheme", "truncation digits must be in [0, 12]");
  }
}

std::int64_t quantize_value(double r, const QuantizationScheme& s) {
  check_scheme(s);
  if (s.kind != SchemeKind::affine)
    throw Error("invalid-scheme", "quantize_value requires an affine scheme");
  if (!std::isfinite(r)) throw Error("non-finite-input", "cannot quantize NaN/Inf");
  // std::round is nearest with ties away from zero.
  const double q = std::round(r / s.scale) - static_cast<double>(s.zero_point);
  const double lo = static_cast<double>(signed_min(s.bits));
  const double hi = static_cast<double>(signed_max(s.bits));
  return static_cast<std::int64_t>(std::min(std::max(q, lo), hi));
}

double dequantize_value(std::int64_t q, const QuantizationScheme& s) {
  check_scheme(s);
  if (s.kind != SchemeKind::affine)
    throw Error("invalid-scheme", "dequantize_value requires an affine scheme");
  return s.scale * static_cast<double>(q + s.zero_point);
}

double truncate_value(double r, int digits) {
  if (!std::isfinite(r)) throw Error("non-finite-input", "cannot truncate NaN/Inf");
  if (digits < 0 || digits > 12)
    throw Error("invalid-scheme", "truncation digits must be in [0, 12]");
  const double scale = kPow10[digits];
  // Past 2^53 / 10^d the decimal grid is finer than the float spacing and
  // truncation cannot move the value.
  if (std::abs(r) >= 9007199254740992.0 / scale) return r;
  const double y = r * scale;
  const double nearest = std::nearbyint(y);
  const double snap_tol = 4.0 * std::numeric_limits<double>::epsilon() *
                          std::max(std::abs(y), 1.0);
  const double n = (std::abs(y - nearest) <= snap_tol) ? nearest : std::trunc(y);
  return n / scale;
}

SchemePolicy SchemePolicy::fixed(const QuantizationScheme& s) {
  check_scheme(s);
  SchemePolicy p;
  p.kind = Kind::fixed;
  p.fixed_scheme = s;
  return p;
}

SchemePolicy SchemePolicy::truncate(int digits) {
  return fixed(QuantizationScheme::truncation(digits));
}

SchemePolicy SchemePolicy::affine_bits(int bits) {
  if (bits < 2 || bits > 16)
    throw Error("invalid-scheme", "affine bits must be in [2, 16]");
  SchemePolicy p;
  p.kind = Kind::affine_calibrated;
  p.bits = bits;
  return p;
}

SchemePolicy SchemePolicy::parse(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    try {
      if (head == "truncate") return truncate(std::stoi(tail));
      if (head == "affine") return affine_bits(std::stoi(tail));
    } catch (const std::logic_error&) {
      // fall through to the error below
    }
  }
  throw Error("invalid-scheme",
              "policy must be 'truncate:<digits>' or 'affine:<bits>', got '" +
                  text + "'");
}

std::string SchemePolicy::to_text() const {
  std::ostringstream os;
  if (kind == Kind::affine_calibrated) {
    os << "affine:" << bits;
  } else if (fixed_scheme.kind == SchemeKind::truncation) {
    os << "truncate:" << fixed_scheme.digits;
  } else {
    os << "affine(scale=" << fixed_scheme.scale << ",zero=" << fixed_scheme.zero_point
       << ",bits=" << fixed_scheme.bits << ")";
  }
  return os.str();
}

namespace {

QuantizationScheme calibrate_affine(const Matrix& values, int bits) {
  const double max_abs = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  const double denom = static_cast<double>(signed_max(bits));
  const double scale = max_abs > 0.0 ? max_abs / denom : 1.0;
  return QuantizationScheme::affine(scale, 0, bits);
}

void apply_scheme(Matrix& values, const QuantizationScheme& s) {
  if (s.kind == SchemeKind::truncation) {
    for (Index c = 0; c < values.cols(); ++c)
      for (Index r = 0; r < values.rows(); ++r)
        values(r, c) = truncate_value(values(r, c), s.digits);
  } else {
    for (Index c = 0; c < values.cols(); ++c)
      for (Index r = 0; r < values.rows(); ++r)
        values(r, c) = dequantize_value(quantize_value(values(r, c), s), s);
  }
}

}  // namespace

QuantizedNetwork quantize_network(const Network& net, const SchemePolicy& policy) {
  require_valid(net);
  QuantizedNetwork q;
  q.origin = net;
  q.net = net;
  for (Layer& layer : q.net.layers) {
    Matrix bias_col = layer.bias;
    QuantizationScheme ws, bs;
    if (policy.kind == SchemePolicy::Kind::affine_calibrated) {
      ws = calibrate_affine(layer.weights, policy.bits);
      bs = calibrate_affine(bias_col, policy.bits);
    } else {
      ws = bs = policy.fixed_scheme;
    }
    apply_scheme(layer.weights, ws);
    apply_scheme(bias_col, bs);
    layer.bias = bias_col;
    q.schemes.push_back(ws);
    q.schemes.push_back(bs);
  }
  return q;
}

QuantizedNetwork quantize_network(const Network& net,
                                  const std::vector<QuantizationScheme>& schemes) {
  require_valid(net);
  if (schemes.size() != 2 * net.layers.size())
    throw Error("invalid-scheme", "need one scheme per tensor (2 per layer)");
  QuantizedNetwork q;
  q.origin = net;
  q.net = net;
  q.schemes = schemes;
  for (std::size_t i = 0; i < q.net.layers.size(); ++i) {
    Layer& layer = q.net.layers[i];
    Matrix bias_col = layer.bias;
    apply_scheme(layer.weights, schemes[2 * i]);
    apply_scheme(bias_col, schemes[2 * i + 1]);
    layer.bias = bias_col;
  }
  return q;
}

namespace {

TensorPerturbation perturbation(const std::string& name, const Matrix& a,
                                const Matrix& b) {
  TensorPerturbation p;
  p.tensor = name;
  if (a.size() > 0) {
    const Matrix diff = (a - b).cwiseAbs();
    p.max_abs = diff.maxCoeff();
    p.mean_abs = diff.mean();
  }
  return p;
}

Storage storage_for(const std::vector<QuantizationScheme>& schemes) {
  bool all_affine = !schemes.empty();
  int max_bits = 0;
  for (const QuantizationScheme& s : schemes) {
    if (s.kind != SchemeKind::affine) { all_affine = false; break; }
    max_bits = std::max(max_bits, s.bits);
  }
  if (!all_affine) return Storage::float64;
  return max_bits <= 8 ? Storage::int8_affine : Storage::int16_affine;
}

}  // namespace

QuantizationStats quantization_stats(const QuantizedNetwork& q) {
  QuantizationStats stats;
  for (std::size_t i = 0; i < q.net.layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i + 1);
    stats.tensors.push_back(perturbation(prefix + ".weights",
                                         q.origin.layers[i].weights,
                                         q.net.layers[i].weights));
    stats.tensors.push_back(perturbation(prefix + ".bias", q.origin.layers[i].bias,
                                         q.net.layers[i].bias));
  }
  for (const TensorPerturbation& t : stats.tensors)
    stats.max_abs_perturbation = std::max(stats.max_abs_perturbation, t.max_abs);
  stats.origin_float32_bytes = model_size_bytes(q.origin, Storage::float32);
  stats.compressed_storage = storage_for(q.schemes);
  stats.compressed_payload_bytes = model_size_bytes(q.net, stats.compressed_storage);
  stats.origin_serialized_bytes = save_model(q.origin).size();
  stats.compressed_serialized_bytes = save_model(q.net).size();
  return stats;
}

std::string format_stats(const QuantizationStats& stats) {
  std::ostringstream os;
  os << "parameter perturbation (|original - quantized|):\n";
  for (const TensorPerturbation& t : stats.tensors) {
    os << "  " << t.tensor << ": max " << t.max_abs << ", mean " << t.mean_abs
       << "\n";
  }
  os << "  overall max: " << stats.max_abs_perturbation << "\n";
  os << "payload bytes: float32 " << stats.origin_float32_bytes << " -> "
     << to_string(stats.compressed_storage) << " " << stats.compressed_payload_bytes;
  if (stats.compressed_payload_bytes < stats.origin_float32_bytes) {
    os << " ("
       << 100.0 * (1.0 - static_cast<double>(stats.compressed_payload_bytes) /
                             static_cast<double>(stats.origin_float32_bytes))
       << "% smaller)";
  }
  os << "\n";
  os << "serialized bytes: " << stats.origin_serialized_bytes << " -> "
     << stats.compressed_serialized_bytes;
  if (stats.compressed_serialized_bytes < stats.origin_serialized_bytes) {
    os << " ("
       << 100.0 * (1.0 - static_cast<double>(stats.compressed_serialized_bytes) /
                             static_cast<double>(stats.origin_serialized_bytes))
       << "% smaller)";
  }
  os << "\n";
  return os.str();
}

std::string save_schemes(const std::vector<QuantizationScheme>& schemes) {
  json arr = json::array();
  for (const QuantizationScheme& s : schemes) {
    json js;
    if (s.kind == SchemeKind::affine) {
      js["kind"] = "affine";
      js["scale"] = s.scale;
      js["zero_point"] = s.zero_point;
      js["bits"] = s.bits;
    } else {
      js["kind"] = "truncation";
      js["digits"] = s.digits;
    }
    arr.push_back(std::move(js));
  }
  return arr.dump();
}

std::vector<QuantizationScheme> load_schemes(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "byte " << e.byte << ": " << e.what();
    throw Error("parse-error", os.str());
  }
  if (!arr.is_array()) throw Error("schema-violation", "scheme sidecar must be an array");
  std::vector<QuantizationScheme> schemes;
  for (const json& js : arr) {
    if (!js.is_object() || !js.contains("kind") || !js["kind"].is_string())
      throw Error("schema-violation", "each scheme needs a string 'kind'");
    const std::string kind = js["kind"].get<std::string>();
    if (kind == "affine") {
      if (!js.contains("scale") || !js.contains("zero_point") || !js.contains("bits"))
        throw Error("schema-violation", "affine scheme needs scale, zero_point, bits");
      schemes.push_back(QuantizationScheme::affine(js["scale"].get<double>(),
                                                   js["zero_point"].get<std::int64_t>(),
                                                   js["bits"].get<int>()));
    } else if (kind == "truncation") {
      if (!js.contains("digits"))
        throw Error("schema-violation", "truncation scheme needs digits");
      schemes.push_back(QuantizationScheme::truncation(js["digits"].get<int>()));
    } else {
      throw Error("schema-violation", "kind must be 'affine' or 'truncation'");
    }
  }
  return schemes;
}

}  // namespace quantcert
