#include "quantcert/certificate_io.hpp"

#include "quantcert/error.hpp"
#include "quantcert/model_io.hpp"
#include "quantcert/version.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>

namespace quantcert {

using nlohmann::json;

std::string save_certificate(const ErrorCertificate& cert) {
  json doc;
  doc["method"] = to_string(cert.method);
  doc["norm"] = to_string(cert.norm);
  doc["eps_target"] = cert.eps_target;
  doc["lo"] = cert.lo;
  doc["hi"] = cert.hi;
  doc["certified"] = cert.certified;
  doc["budget_exhausted"] = cert.budget_exhausted;
  json witness = json::array();
  for (Index i = 0; i < cert.witness_input.size(); ++i) {
    witness.push_back(cert.witness_input[i]);
  }
  doc["witness_input"] = std::move(witness);
  doc["boxes_processed"] = cert.boxes_processed;
  doc["max_depth"] = cert.max_depth;
  doc["wall_time_ms"] = cert.wall_time_ms;
  doc["tool_version"] = kToolVersion;
  return doc.dump();
}

namespace {

const json& field(const json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) {
    throw Error("schema-violation",
                std::string("certificate is missing field '") + name + "'");
  }
  return *it;
}

double number(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_number()) {
    throw Error("schema-violation", std::string(name) + " must be a number");
  }
  return v.get<double>();
}

bool boolean(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_boolean()) {
    throw Error("schema-violation", std::string(name) + " must be a boolean");
  }
  return v.get<bool>();
}

}  // namespace

ErrorCertificate load_certificate(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "byte " << e.byte << ": " << e.what();
    throw Error("parse-error", os.str());
  }
  if (!doc.is_object()) {
    throw Error("schema-violation", "top level must be an object");
  }
  static const char* const kFields[] = {
      "method",          "norm",        "eps_target",      "lo",
      "hi",              "certified",   "budget_exhausted", "witness_input",
      "boxes_processed", "max_depth",   "wall_time_ms",    "tool_version"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool known = false;
    for (const char* name : kFields) {
      if (it.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error("schema-violation",
                  "unknown field '" + it.key() + "' in certificate");
    }
  }

  ErrorCertificate cert;
  const json& method = field(doc, "method");
  if (!method.is_string()) {
    throw Error("schema-violation", "method must be a string");
  }
  cert.method = method_from_string(method.get<std::string>());
  const json& norm = field(doc, "norm");
  if (!norm.is_string()) {
    throw Error("schema-violation", "norm must be a string");
  }
  cert.norm = norm_from_string(norm.get<std::string>());
  cert.eps_target = number(doc, "eps_target");
  cert.lo = number(doc, "lo");
  cert.hi = number(doc, "hi");
  cert.certified = boolean(doc, "certified");
  cert.budget_exhausted = boolean(doc, "budget_exhausted");
  const json& witness = field(doc, "witness_input");
  if (!witness.is_array()) {
    throw Error("schema-violation", "witness_input must be an array");
  }
  cert.witness_input.resize(static_cast<Index>(witness.size()));
  for (std::size_t i = 0; i < witness.size(); ++i) {
    if (!witness[i].is_number()) {
      throw Error("schema-violation", "witness_input must contain numbers");
    }
    cert.witness_input[static_cast<Index>(i)] = witness[i].get<double>();
  }
  cert.boxes_processed =
      static_cast<std::uint64_t>(number(doc, "boxes_processed"));
  cert.max_depth = static_cast<int>(number(doc, "max_depth"));
  cert.wall_time_ms = number(doc, "wall_time_ms");
  const json& version = field(doc, "tool_version");
  if (!version.is_string()) {
    throw Error("schema-violation", "tool_version must be a string");
  }

  if (!std::isfinite(cert.lo) || !std::isfinite(cert.hi) ||
      cert.lo > cert.hi) {
    throw Error("schema-violation", "certificate must satisfy lo <= hi");
  }
  return cert;
}

void save_certificate_file(const ErrorCertificate& cert,
                           const std::string& path) {
  write_text_file(path, save_certificate(cert));
}

ErrorCertificate load_certificate_file(const std::string& path) {
  return load_certificate(read_text_file(path));
}

}  // namespace quantcert
