#pragma once

#include "quantcert/network.hpp"
#include "quantcert/quantization.hpp"

#include <string>
#include <vector>

namespace quantcert {

// (L+1)-layer network computing phi(u) - phi_q(u) for every input u:
// layer 1 stacks both first layers vertically, layers 2..L run the two
// paths block-diagonally, and a final bias-free linear [I, -I] layer
// subtracts the two outputs. Stored dense, explicit zero blocks included,
// so it evaluates and propagates like any other Network.
struct MergedNetwork {
  Network net;
  std::vector<Index> source_dims;  // dims shared by the two source networks
};

MergedNetwork merge(const Network& phi, const QuantizedNetwork& phi_q);

// Same construction for any architecture-identical pair.
MergedNetwork merge_networks(const Network& phi, const Network& phi_q);

struct MergedLayerShape {
  Index rows = 0;
  Index cols = 0;
  std::int64_t structural_zeros = 0;  // entries pinned to zero by the layout
  bool zeros_intact = true;           // those entries are actually zero
};

struct MergedShapeReport {
  std::vector<MergedLayerShape> layers;
  bool final_bias_zero = true;
  std::string text;
};

MergedShapeReport merged_shape_report(const MergedNetwork& m);

}  // namespace quantcert
