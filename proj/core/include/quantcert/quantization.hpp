#pragma once

#include "quantcert/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace quantcert {

enum class SchemeKind { affine, truncation };

// Parameters of the quantizer applied to one tensor.
//   affine:     q = round(r / scale) - zero_point, clamped to `bits` signed range
//   truncation: keep `digits` decimal places, rounding toward zero
struct QuantizationScheme {
  SchemeKind kind = SchemeKind::truncation;
  double scale = 1.0;          // affine only, > 0
  std::int64_t zero_point = 0; // affine only, within the signed range of `bits`
  int bits = 8;                // affine only, in [2, 16]
  int digits = 0;              // truncation only, in [0, 12]

  static QuantizationScheme affine(double scale, std::int64_t zero_point, int bits);
  static QuantizationScheme truncation(int digits);
};

void check_scheme(const QuantizationScheme& s);

std::int64_t quantize_value(double r, const QuantizationScheme& s);
double dequantize_value(std::int64_t q, const QuantizationScheme& s);

// Decimal truncation toward zero. Values within a few ulp of a d-decimal
// boundary snap onto it, so re-truncating an already truncated value is a
// bit-exact no-op.
double truncate_value(double r, int digits);

// How a whole network gets quantized: one fixed scheme for every tensor, or
// per-tensor symmetric affine calibration (S = max|entries| / (2^{b-1}-1),
// Z = 0) at a given bit width.
struct SchemePolicy {
  enum class Kind { fixed, affine_calibrated };
  Kind kind = Kind::fixed;
  QuantizationScheme fixed_scheme;
  int bits = 8;  // affine_calibrated only

  static SchemePolicy fixed(const QuantizationScheme& s);
  static SchemePolicy truncate(int digits);
  static SchemePolicy affine_bits(int bits);

  // "truncate:4" | "affine:8"
  static SchemePolicy parse(const std::string& text);
  std::string to_text() const;
};

// The simulated-quantization realization: `net` carries dequantized real
// weights so it can be evaluated on real inputs and subtracted from `origin`.
// Tensor order for `schemes` is layer-major, weights before bias.
struct QuantizedNetwork {
  Network net;
  std::vector<QuantizationScheme> schemes;
  Network origin;
};

QuantizedNetwork quantize_network(const Network& net, const SchemePolicy& policy);

// Re-applies previously derived per-tensor schemes (e.g. from a sidecar file).
QuantizedNetwork quantize_network(const Network& net,
                                  const std::vector<QuantizationScheme>& schemes);

struct TensorPerturbation {
  std::string tensor;  // "layer3.weights", "layer3.bias"
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

struct QuantizationStats {
  std::vector<TensorPerturbation> tensors;
  double max_abs_perturbation = 0.0;
  // float32 payload of the origin vs the payload at the scheme's storage
  // width (affine schemes map to int8/int16; truncation keeps float64).
  std::uint64_t origin_float32_bytes = 0;
  Storage compressed_storage = Storage::float64;
  std::uint64_t compressed_payload_bytes = 0;
  // Byte sizes of the serialized model files; truncation shows its gain here.
  std::uint64_t origin_serialized_bytes = 0;
  std::uint64_t compressed_serialized_bytes = 0;
};

QuantizationStats quantization_stats(const QuantizedNetwork& q);
std::string format_stats(const QuantizationStats& stats);

// Sidecar scheme file: a JSON array with one {kind, scale, zero_point, bits}
// or {kind, digits} object per tensor, in `schemes` order.
std::string save_schemes(const std::vector<QuantizationScheme>& schemes);
std::vector<QuantizationScheme> load_schemes(const std::string& text);

}  // namespace quantcert
