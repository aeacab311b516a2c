#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace quantcert {

// All library failures throw this. `code` is a stable machine-checkable
// identifier ("dimension-mismatch", "non-finite-input", ...); what() carries
// the human-readable detail.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

}  // namespace quantcert
