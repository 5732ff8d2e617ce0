#pragma once

#include <memory>
#include <optional>

#include "hpnet/geometry.hpp"
#include "hpnet/systems.hpp"

namespace hpnet {

struct FieldSample {
    InvariantPair R;
    double theta = 0.0;  // inclination of the 1-direction; branch local to the query
};

// Point evaluator for a solution field.  Returns nothing outside the region
// the backing data covers.  Implementations must be safe for concurrent calls.
class SolutionField {
  public:
    virtual ~SolutionField() = default;
    virtual std::optional<FieldSample> sample(cplx z) const = 0;
};

// Constant solution: theta and R the same everywhere.  Null fixture.
class ConstantField : public SolutionField {
  public:
    ConstantField(double theta, InvariantPair r) : theta_(theta), r_(r) {}
    std::optional<FieldSample> sample(cplx) const override { return FieldSample{r_, theta_}; }

  private:
    double theta_;
    InvariantPair r_;
};

}  // namespace hpnet
