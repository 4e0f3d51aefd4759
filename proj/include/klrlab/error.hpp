#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace klrlab {

/// Base class for every error raised by the library. `kind()` is the stable
/// identifier written into JSON diagnostics.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

class InvalidArgument : public Error {
  public:
    explicit InvalidArgument(const std::string& message) : Error("InvalidArgument", message) {}
};

/// A CF dropped below the magnitude floor; the working grid must shrink.
class MagnitudeFloorViolation : public Error {
  public:
    MagnitudeFloorViolation(double t, double magnitude, double floor);

    double t() const noexcept { return t_; }
    double magnitude() const noexcept { return magnitude_; }

  private:
    double t_;
    double magnitude_;
};

/// Adjacent phase steps too large to unwrap unambiguously.
class PhaseUnwrapError : public Error {
  public:
    PhaseUnwrapError(double t, double step);

    double t() const noexcept { return t_; }

  private:
    double t_;
};

class GridMismatch : public Error {
  public:
    explicit GridMismatch(const std::string& message) : Error("GridMismatch", message) {}
};

class NonUniformGrid : public Error {
  public:
    explicit NonUniformGrid(const std::string& message) : Error("NonUniformGrid", message) {}
};

class NotOnHyperplane : public Error {
  public:
    explicit NotOnHyperplane(double sum);
};

class DegenerateTargets : public Error {
  public:
    DegenerateTargets() : Error("DegenerateTargets", "targets have zero variance") {}
};

class OutOfGrid : public Error {
  public:
    OutOfGrid(double tau, double lo, double hi);
};

class ConfigError : public Error {
  public:
    ConfigError(std::string field, const std::string& message);

    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

class IngestionError : public Error {
  public:
    IngestionError(std::string path, std::size_t line, const std::string& message);

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

  private:
    std::string path_;
    std::size_t line_;
};

}  // namespace klrlab
