#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

namespace msle {

/// Base of every library error. Carries a machine-readable payload that the
/// CLI forwards verbatim on stderr.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, nlohmann::json payload = {})
      : std::runtime_error(what), kind_(std::move(kind)), payload_(std::move(payload)) {}

  const std::string& kind() const noexcept { return kind_; }
  const nlohmann::json& payload() const noexcept { return payload_; }

  nlohmann::json to_json() const {
    nlohmann::json j = payload_.is_object() ? payload_ : nlohmann::json::object();
    j["error"] = kind_;
    j["message"] = what();
    return j;
  }

 private:
  std::string kind_;
  nlohmann::json payload_;
};

/// Invalid arguments or configuration (bad ranges, points outside the domain).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, nlohmann::json payload = {})
      : Error("domain", what, std::move(payload)) {}
};

/// A numerical procedure failed: particle collision, bisection bracket,
/// Newton non-convergence, fit residual too large.
class NumericalError : public Error {
 public:
  NumericalError(std::string kind, const std::string& what, nlohmann::json payload = {})
      : Error(std::move(kind), what, std::move(payload)) {}
};

}  // namespace msle
