#include "aki/errors.hpp"

namespace aki {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicatePatientId: return "DuplicatePatientId";
    case ErrorCode::UnknownSignal: return "UnknownSignal";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InfeasiblePrevalence: return "InfeasiblePrevalence";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::NoBaselineAvailable: return "NoBaselineAvailable";
    case ErrorCode::DegenerateOutcome: return "DegenerateOutcome";
    case ErrorCode::SeriesUnusable: return "SeriesUnusable";
    case ErrorCode::EmptyLab: return "EmptyLab";
    case ErrorCode::NoOxygenData: return "NoOxygenData";
    case ErrorCode::EmptyCohort: return "EmptyCohort";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::RowMisalignment: return "RowMisalignment";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::ResampleDegenerate: return "ResampleDegenerate";
    case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError:
        return 2;
    case ErrorCode::MissingColumn:
    case ErrorCode::MalformedRow:
    case ErrorCode::DuplicatePatientId:
    case ErrorCode::UnknownSignal:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::EmptyCohort:
    case ErrorCode::EmptyLab:
    case ErrorCode::NoOxygenData:
    case ErrorCode::NoBaselineAvailable:
    case ErrorCode::IoError:
        return 3;
    default:
        return 4;
    }
}

} // namespace aki
