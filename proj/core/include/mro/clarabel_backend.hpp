#pragma once

#include "mro/conic.hpp"

namespace mro {

/// Interior-point backend over the Clarabel solver. Supports every cone kind
/// in the IR; rotated second-order cones are rewritten as plain second-order
/// cones before the solver sees them.
class ClarabelBackend : public SolverBackend {
 public:
  std::string id() const override { return "clarabel"; }
  bool supports(ConeKind kind) const override;
  Solution solve(const ConicProgram& program, const SolveOptions& opts) const override;
};

}  // namespace mro
