#pragma once

#include "quantcert/network.hpp"

#include <doctest.h>

#include <initializer_list>
#include <string>
#include <utility>

namespace quantcert::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    REQUIRE(static_cast<Index>(row.size()) == c);
    Index j = 0;
    for (const double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> entries) {
  Vector v(static_cast<Index>(entries.size()));
  Index i = 0;
  for (const double e : entries) v[i++] = e;
  return v;
}

inline Layer layer(Matrix weights, Vector bias, Activation act) {
  return Layer{std::move(weights), std::move(bias), act};
}

inline Network single_layer_net(Matrix weights, Vector bias, Activation act) {
  Network net;
  net.input_dim = weights.cols();
  net.layers.push_back(layer(std::move(weights), std::move(bias), act));
  return net;
}

// true iff the two matrices are equal entry by entry, no tolerance
inline bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         ((a.array() == b.array()).all());
}

inline bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() && ((a.array() == b.array()).all());
}

inline bool same_network(const Network& a, const Network& b) {
  if (a.input_dim != b.input_dim || a.layers.size() != b.layers.size())
    return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].activation != b.layers[i].activation) return false;
    if (!same_bits(a.layers[i].weights, b.layers[i].weights)) return false;
    if (!same_bits(a.layers[i].bias, b.layers[i].bias)) return false;
  }
  return true;
}

}  // namespace quantcert::testing
