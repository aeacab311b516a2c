#include "quantcert/network.hpp"

#include "quantcert/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace quantcert {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::linear: return "linear";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "linear") return Activation::linear;
  throw Error("unknown-activation", "no activation named '" + name + "'");
}

bool is_piecewise_linear(Activation a) {
  return a == Activation::relu || a == Activation::linear;
}

double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::linear: return x;
  }
  return x;
}

Vector apply_activation(Activation a, const Vector& x) {
  if (a == Activation::linear) return x;
  Vector y(x.size());
  for (Index i = 0; i < x.size(); ++i) y[i] = apply_activation(a, x[i]);
  return y;
}

std::vector<Index> Network::dims() const {
  std::vector<Index> d;
  d.push_back(input_dim);
  for (const Layer& l : layers) d.push_back(l.out_dim());
  return d;
}

std::vector<ValidationIssue> validate(const Network& net) {
  std::vector<ValidationIssue> issues;
  if (net.layers.empty()) {
    issues.push_back({"empty-network", -1, "network has no layers"});
    return issues;
  }
  Index prev = net.input_dim;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    const int idx = static_cast<int>(i) + 1;
    if (l.weights.cols() != prev) {
      std::ostringstream os;
      os << "layer " << idx << " expects " << l.weights.cols()
         << " inputs but receives " << prev;
      issues.push_back({"dimension-mismatch", idx, os.str()});
    }
    if (l.bias.size() != l.weights.rows()) {
      std::ostringstream os;
      os << "layer " << idx << " bias length " << l.bias.size()
         << " != weight rows " << l.weights.rows();
      issues.push_back({"dimension-mismatch", idx, os.str()});
    }
    for (Index r = 0; r < l.weights.rows(); ++r) {
      for (Index c = 0; c < l.weights.cols(); ++c) {
        if (!std::isfinite(l.weights(r, c))) {
          std::ostringstream os;
          os << "layer " << idx << " weight (" << r << "," << c << ") is not finite";
          issues.push_back({"non-finite-entry", idx, os.str()});
        }
      }
    }
    for (Index r = 0; r < l.bias.size(); ++r) {
      if (!std::isfinite(l.bias[r])) {
        std::ostringstream os;
        os << "layer " << idx << " bias (" << r << ") is not finite";
        issues.push_back({"non-finite-entry", idx, os.str()});
      }
    }
    prev = l.weights.rows();
  }
  if (net.input_dim < 1) issues.push_back({"dimension-mismatch", -1, "input_dim must be positive"});
  return issues;
}

void require_valid(const Network& net) {
  std::vector<ValidationIssue> issues = validate(net);
  if (issues.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].code << " (" << issues[i].detail << ")";
  }
  throw Error("invalid-network", os.str());
}

namespace {

void check_input(const Network& net, Index rows) {
  if (rows != net.input_dim) {
    std::ostringstream os;
    os << "got " << rows << " entries, network expects " << net.input_dim;
    throw Error("input-length-mismatch", os.str());
  }
}

}  // namespace

Vector eval(const Network& net, const Vector& u) {
  check_input(net, u.size());
  if (!u.allFinite()) throw Error("non-finite-input", "input vector has NaN/Inf");
  Vector x = u;
  for (const Layer& l : net.layers) {
    x = apply_activation(l.activation, (l.weights * x + l.bias).eval());
  }
  return x;
}

Matrix eval_batch(const Network& net, const Matrix& inputs) {
  check_input(net, inputs.rows());
  if (!inputs.allFinite()) throw Error("non-finite-input", "input matrix has NaN/Inf");
  Matrix x = inputs;
  for (const Layer& l : net.layers) {
    Matrix pre = (l.weights * x).colwise() + l.bias;
    if (l.activation == Activation::linear) {
      x = std::move(pre);
    } else {
      x.resize(pre.rows(), pre.cols());
      for (Index c = 0; c < pre.cols(); ++c)
        for (Index r = 0; r < pre.rows(); ++r)
          x(r, c) = apply_activation(l.activation, pre(r, c));
    }
  }
  return x;
}

std::vector<Vector> eval_trace(const Network& net, const Vector& u) {
  check_input(net, u.size());
  std::vector<Vector> trace;
  trace.reserve(net.layers.size());
  Vector x = u;
  for (const Layer& l : net.layers) {
    x = apply_activation(l.activation, (l.weights * x + l.bias).eval());
    trace.push_back(x);
  }
  return trace;
}

namespace {

// Portable standard-normal stream: mt19937_64 uniforms mapped to (0,1) as
// ((x >> 12) + 0.5) / 2^52 and [0,1) as (y >> 11) / 2^53, paired through the
// basic Box-Muller transform. Both variates of a pair are consumed in order.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 =
        (static_cast<double>(gen_() >> 12) + 0.5) / 4503599627370496.0;
    const double u2 = static_cast<double>(gen_() >> 11) / 9007199254740992.0;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace

Network random_network(const std::vector<Index>& dims, Activation hidden,
                       std::uint64_t seed) {
  if (dims.size() < 2) throw Error("dims-too-short", "need at least [input, output]");
  for (Index d : dims) {
    if (d < 1) throw Error("dims-too-short", "all dims must be positive");
  }
  NormalStream normal(seed);
  Network net;
  net.input_dim = dims[0];
  const std::size_t layer_count = dims.size() - 1;
  for (std::size_t l = 0; l < layer_count; ++l) {
    Layer layer;
    layer.weights.resize(dims[l + 1], dims[l]);
    // Row-major fill, then bias, so the draw order is part of the format.
    for (Index r = 0; r < layer.weights.rows(); ++r)
      for (Index c = 0; c < layer.weights.cols(); ++c)
        layer.weights(r, c) = normal.next();
    layer.bias.resize(dims[l + 1]);
    for (Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = normal.next();
    layer.activation = (l + 1 == layer_count) ? Activation::linear : hidden;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

const char* to_string(Storage s) {
  switch (s) {
    case Storage::float64: return "float64";
    case Storage::float32: return "float32";
    case Storage::int8_affine: return "int8-affine";
    case Storage::int16_affine: return "int16-affine";
  }
  return "?";
}

std::uint64_t parameter_count(const Network& net) {
  std::uint64_t n = 0;
  for (const Layer& l : net.layers)
    n += static_cast<std::uint64_t>(l.weights.size()) +
         static_cast<std::uint64_t>(l.bias.size());
  return n;
}

std::uint64_t model_size_bytes(const Network& net, Storage storage) {
  require_valid(net);
  std::uint64_t per_entry = 0;
  bool affine = false;
  switch (storage) {
    case Storage::float64: per_entry = 8; break;
    case Storage::float32: per_entry = 4; break;
    case Storage::int8_affine: per_entry = 1; affine = true; break;
    case Storage::int16_affine: per_entry = 2; affine = true; break;
  }
  std::uint64_t bytes = parameter_count(net) * per_entry;
  if (affine) {
    // scale + zero point per tensor, two tensors (W, b) per layer
    bytes += 16u * 2u * static_cast<std::uint64_t>(net.layers.size());
  }
  return bytes;
}

}  // namespace quantcert
