#pragma once

#include <stdexcept>
#include <string>

namespace topoflow {

// Base for every library failure; the CLI maps subclasses to exit codes.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define TOPOFLOW_ERROR(name)                  \
  struct name : error {                       \
    using error::error;                       \
  }

TOPOFLOW_ERROR(ConfigError);
TOPOFLOW_ERROR(SingularSection);
TOPOFLOW_ERROR(DivisionByZero);
TOPOFLOW_ERROR(GapClosure);
TOPOFLOW_ERROR(PunctureError);
TOPOFLOW_ERROR(DegenerateRoots);
TOPOFLOW_ERROR(MultiplicityError);
TOPOFLOW_ERROR(DomainError);
TOPOFLOW_ERROR(SingularG);
TOPOFLOW_ERROR(RadicandError);

// numerical failures (exit code 3)
struct NumericalFailure : error {
  using error::error;
};

#define TOPOFLOW_NUMERICAL(name)              \
  struct name : NumericalFailure {            \
    using NumericalFailure::NumericalFailure; \
  }

TOPOFLOW_NUMERICAL(PartitionFailure);
TOPOFLOW_NUMERICAL(TracingAmbiguity);
TOPOFLOW_NUMERICAL(TangencyUnresolved);
TOPOFLOW_NUMERICAL(UnwrapFailure);

#undef TOPOFLOW_ERROR
#undef TOPOFLOW_NUMERICAL

}  // namespace topoflow
