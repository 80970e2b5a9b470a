#pragma once

#include <stdexcept>
#include <string>

namespace nfmi {

// Error taxonomy shared across modules. Each class maps to a CLI exit code
// (see experiment.hpp); anything not listed falls back to std::runtime_error.

struct InvalidSpec : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridTooCoarse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsatisfiableGrading : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergedSimulation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BandEdge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResolutionTooFine : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoResonance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EdgeResonance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MultiPeak : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SinglePeak : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlaneNotRecorded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnitError : SchemaError {
  using SchemaError::SchemaError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace nfmi
