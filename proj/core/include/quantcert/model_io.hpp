#pragma once

#include "quantcert/network.hpp"

#include <string>

namespace quantcert {

// Model file format: a UTF-8 JSON document
//   {"input_dim": <int>, "layers": [{"weights": [[...]], "bias": [...],
//    "activation": "relu"|"tanh"|"sigmoid"|"linear"}, ...]}
// Doubles are written with enough decimal digits to round-trip bit-exactly.
// Unknown fields are rejected.

std::string save_model(const Network& net);
Network load_model(const std::string& text);

void save_model_file(const Network& net, const std::string& path);
Network load_model_file(const std::string& path);

// Plain file helpers shared by the other writers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace quantcert
