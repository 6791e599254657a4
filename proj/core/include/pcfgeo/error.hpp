#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcfgeo {

enum class ErrorKind {
  invalid_parameter,  // unsupported generator kind or parameter
  invalid_argument,   // malformed call (level too small, bad ref, ...)
  validation,         // spec file content rejected
  resource,           // requested level exceeds the configured memory bound
  degenerate_form,    // singular eliminated block in a trace
  no_equal_weight_structure,
  broken_structure,   // eigen data of a fixed point could not be found
  degenerate,         // parallel eigenvectors in the separation constant
  internal,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pcfgeo
