#pragma once

#include <stdexcept>
#include <string>

namespace aki {

enum class ErrorCode {
    // ingestion / config
    MissingColumn,
    MalformedRow,
    DuplicatePatientId,
    UnknownSignal,
    ConfigError,
    SchemaMismatch,
    // cohort synthesis / split
    InfeasiblePrevalence,
    TooFewPerClass,
    // labeling
    NoBaselineAvailable,
    // preprocessing / features
    DegenerateOutcome,
    SeriesUnusable,
    EmptyLab,
    NoOxygenData,
    EmptyCohort,
    // modeling
    NonConvergence,
    RowMisalignment,
    // evaluation
    SingleClass,
    ResampleDegenerate,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Exit-code buckets used by the CLI: 2 config, 3 data, 4 modeling.
int exit_code_for(ErrorCode code);

} // namespace aki
