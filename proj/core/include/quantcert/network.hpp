#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace quantcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Scalar activations. All of them are monotonically non-decreasing, which the
// interval propagation relies on; relu and linear are additionally piecewise
// linear, which the exact 1-D reachability relies on.
enum class Activation { relu, tanh, sigmoid, linear };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

bool is_piecewise_linear(Activation a);
double apply_activation(Activation a, double x);
Vector apply_activation(Activation a, const Vector& x);

// One dense layer: y = activation(weights * x + bias).
// weights is n_out x n_in, bias has length n_out.
struct Layer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::linear;

  Index out_dim() const { return weights.rows(); }
  Index in_dim() const { return weights.cols(); }
};

// Fully-connected feedforward network. Immutable by convention once built:
// nothing in the library mutates a Network after construction, so const
// references can be shared freely across threads.
struct Network {
  std::vector<Layer> layers;
  Index input_dim = 0;

  Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
  std::size_t depth() const { return layers.size(); }
  // [input_dim, n_1, ..., n_L]
  std::vector<Index> dims() const;
};

struct ValidationIssue {
  std::string code;  // "empty-network" | "dimension-mismatch" | "non-finite-entry"
  int layer = -1;    // 1-based layer index, -1 if not layer-specific
  std::string detail;
};

// Checks every structural invariant; empty result means the network is valid.
std::vector<ValidationIssue> validate(const Network& net);

// Throws Error("invalid-network") listing every issue found.
void require_valid(const Network& net);

Vector eval(const Network& net, const Vector& u);

// Evaluates one input per column; much faster than repeated eval() for grids.
Matrix eval_batch(const Network& net, const Matrix& inputs);

// Post-activation vector of every layer, for structural tests and debugging.
std::vector<Vector> eval_trace(const Network& net, const Vector& u);

// Deterministic generator: all weights and biases are i.i.d. standard normal
// draws from mt19937_64(seed) fed through Box-Muller (see network.cpp for the
// exact variate recipe). Hidden layers get `hidden`, the output layer is
// always linear. Same seed, same platform-independent bits.
Network random_network(const std::vector<Index>& dims, Activation hidden,
                       std::uint64_t seed);

// Parameter payload sizes for the size report. Affine storages carry a
// 16-byte per-tensor overhead (8-byte scale + 8-byte zero point).
enum class Storage { float64, float32, int8_affine, int16_affine };

const char* to_string(Storage s);
std::uint64_t model_size_bytes(const Network& net, Storage storage);

std::uint64_t parameter_count(const Network& net);

}  // namespace quantcert
