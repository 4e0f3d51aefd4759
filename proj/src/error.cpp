#include "klrlab/error.hpp"

#include <sstream>

namespace klrlab {

namespace {

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

MagnitudeFloorViolation::MagnitudeFloorViolation(double t, double magnitude, double floor)
    : Error("MagnitudeFloorViolation",
            "|cf(t)| = " + format_double(magnitude) + " below floor " + format_double(floor) +
                " at t = " + format_double(t) + "; shrink the grid half-width"),
      t_(t),
      magnitude_(magnitude) {}

PhaseUnwrapError::PhaseUnwrapError(double t, double step)
    : Error("PhaseUnwrapError", "phase step " + format_double(step) + " at t = " + format_double(t) +
                                    " is too large to unwrap; refine the grid"),
      t_(t) {}

NotOnHyperplane::NotOnHyperplane(double sum)
    : Error("NotOnHyperplane", "vector sums to " + format_double(sum) + ", expected 0") {}

OutOfGrid::OutOfGrid(double tau, double lo, double hi)
    : Error("OutOfGrid", "point " + format_double(tau) + " outside [" + format_double(lo) + ", " +
                             format_double(hi) + "]") {}

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error("ConfigError", field + ": " + message), field_(std::move(field)) {}

IngestionError::IngestionError(std::string path, std::size_t line, const std::string& message)
    : Error("IngestionError", path + ":" + std::to_string(line) + ": " + message),
      path_(std::move(path)),
      line_(line) {}

}  // namespace klrlab
