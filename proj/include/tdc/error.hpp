#pragma once

#include <stdexcept>
#include <string>

namespace tdc {

enum class Errc {
  invalid_argument = 1,
  geometry_too_coarse,
  step_size,
  solver_convergence,
  no_flushing,
  cannot_shrink,
  parameter_overflow,
  non_convergence,
  oracle_too_large,
  resolution_too_coarse,
  domain_error,
  config,
  io,
  escape,
  unsupported_geometry,
  construction,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tdc
