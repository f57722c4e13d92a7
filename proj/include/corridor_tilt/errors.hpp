#pragma once

// Exception types shared across the library.

#include <stdexcept>
#include <string>

namespace corridor_tilt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Station and evaluation point coincide in 3D; pathloss is undefined there.
struct DegenerateGeometry : Error {
  using Error::Error;
};

// A region required by the mixture produced no quadrature points.
struct EmptyRegion : Error {
  using Error::Error;
};

// The mixture weight demands a population for which no region was declared.
struct InvalidMixture : Error {
  using Error::Error;
};

// A CDF was requested over a population with zero total mass.
struct EmptyPopulation : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

// Carries the name of the violated field/invariant.
struct ValidationError : Error {
  explicit ValidationError(const std::string& field, const std::string& detail)
      : Error(field + ": " + detail), field_name(field) {}
  std::string field_name;
};

}  // namespace corridor_tilt
