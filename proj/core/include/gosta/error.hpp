#pragma once

#include <stdexcept>
#include <string>

namespace gosta {

enum class ErrorKind {
  invalid_size,
  invalid_parameter,
  invalid_graph,
  disconnected_graph,
  empty_edge_set,
  invalid_data,
  missing_input,
  size_cap_exceeded,
  hypothesis_violated,
  parse_error,
  file_not_found,
  io_error,
  invariant_violated,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type thrown by the library; `kind()` lets callers
/// and tests distinguish failure classes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gosta
