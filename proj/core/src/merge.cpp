#include "quantcert/merge.hpp"

#include "quantcert/error.hpp"

#include <sstream>

namespace quantcert {

MergedNetwork merge_networks(const Network& phi, const Network& phi_q) {
  require_valid(phi);
  require_valid(phi_q);
  if (phi.input_dim != phi_q.input_dim || phi.depth() != phi_q.depth())
    throw Error("architecture-mismatch", "source networks differ in shape");
  for (std::size_t i = 0; i < phi.layers.size(); ++i) {
    const Layer& a = phi.layers[i];
    const Layer& b = phi_q.layers[i];
    if (a.out_dim() != b.out_dim() || a.in_dim() != b.in_dim())
      throw Error("architecture-mismatch",
                  "layer " + std::to_string(i + 1) + " shapes differ");
    if (a.activation != b.activation)
      throw Error("architecture-mismatch",
                  "layer " + std::to_string(i + 1) + " activations differ");
  }

  const std::size_t depth = phi.depth();
  const Index n_y = phi.output_dim();

  MergedNetwork m;
  m.source_dims = phi.dims();
  m.net.input_dim = phi.input_dim;

  for (std::size_t l = 0; l < depth; ++l) {
    const Layer& a = phi.layers[l];
    const Layer& b = phi_q.layers[l];
    Layer stacked;
    if (l == 0) {
      stacked.weights.resize(2 * a.out_dim(), a.in_dim());
      stacked.weights << a.weights, b.weights;
    } else {
      stacked.weights = Matrix::Zero(2 * a.out_dim(), 2 * a.in_dim());
      stacked.weights.topLeftCorner(a.out_dim(), a.in_dim()) = a.weights;
      stacked.weights.bottomRightCorner(b.out_dim(), b.in_dim()) = b.weights;
    }
    stacked.bias.resize(2 * a.out_dim());
    stacked.bias << a.bias, b.bias;
    stacked.activation = a.activation;
    m.net.layers.push_back(std::move(stacked));
  }

  Layer subtract;
  subtract.weights.resize(n_y, 2 * n_y);
  subtract.weights << Matrix::Identity(n_y, n_y), -Matrix::Identity(n_y, n_y);
  subtract.bias = Vector::Zero(n_y);
  subtract.activation = Activation::linear;
  m.net.layers.push_back(std::move(subtract));

  return m;
}

MergedNetwork merge(const Network& phi, const QuantizedNetwork& phi_q) {
  return merge_networks(phi, phi_q.net);
}

MergedShapeReport merged_shape_report(const MergedNetwork& m) {
  MergedShapeReport report;
  const std::size_t depth = m.net.layers.size();
  std::ostringstream os;
  os << "merged network, " << depth << " layers, input dim " << m.net.input_dim
     << "\n";
  for (std::size_t l = 0; l < depth; ++l) {
    const Layer& layer = m.net.layers[l];
    MergedLayerShape shape;
    shape.rows = layer.out_dim();
    shape.cols = layer.in_dim();
    if (l > 0 && l + 1 < depth) {
      // off-diagonal blocks of the block-diagonal middle layers
      const Index half_r = shape.rows / 2;
      const Index half_c = shape.cols / 2;
      shape.structural_zeros = 2 * half_r * half_c;
      shape.zeros_intact =
          layer.weights.topRightCorner(half_r, half_c).isZero(0.0) &&
          layer.weights.bottomLeftCorner(half_r, half_c).isZero(0.0);
    }
    os << "  layer " << (l + 1) << ": " << shape.rows << "x" << shape.cols << " "
       << to_string(layer.activation);
    if (shape.structural_zeros > 0)
      os << ", " << shape.structural_zeros << " structural zeros"
         << (shape.zeros_intact ? "" : " (VIOLATED)");
    os << "\n";
    report.layers.push_back(shape);
  }
  report.final_bias_zero = m.net.layers.back().bias.isZero(0.0);
  os << "  final bias zero: " << (report.final_bias_zero ? "yes" : "NO") << "\n";
  report.text = os.str();
  return report;
}

}  // namespace quantcert
