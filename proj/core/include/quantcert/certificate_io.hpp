#pragma once

#include "quantcert/solver.hpp"

#include <string>

namespace quantcert {

// Certificate file format: a JSON object with
//   method, norm, eps_target, lo, hi, certified, budget_exhausted,
//   witness_input (array), boxes_processed, max_depth, wall_time_ms,
//   tool_version
// Unknown fields are rejected on load; tool_version is recorded but any
// value is accepted back.

std::string save_certificate(const ErrorCertificate& cert);
ErrorCertificate load_certificate(const std::string& text);

void save_certificate_file(const ErrorCertificate& cert,
                           const std::string& path);
ErrorCertificate load_certificate_file(const std::string& path);

}  // namespace quantcert
