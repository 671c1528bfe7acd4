#pragma once

#include <stdexcept>
#include <string>

namespace lenticolor {

enum class ErrorCode {
    IoFailure,
    NonFiniteValue,
    BadMagic,
    DimensionMismatch,
    RangeViolation,
    SimplexViolation,
    ScaleOutOfRange,
    NoDominantPeak,
    TooFewPeaks,
    IllPosedFit,
    NonFiniteObjective,
    GridImageMismatch,
    DegenerateOutput,
    TensorDimMismatch,
    SingularMatrix,
    SourceTooNarrow,
    DimMismatch,
    CorpusEmpty,
    BadConfig,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::IoFailure:          return "IoFailure";
        case ErrorCode::NonFiniteValue:     return "NonFiniteValue";
        case ErrorCode::BadMagic:           return "BadMagic";
        case ErrorCode::DimensionMismatch:  return "DimensionMismatch";
        case ErrorCode::RangeViolation:     return "RangeViolation";
        case ErrorCode::SimplexViolation:   return "SimplexViolation";
        case ErrorCode::ScaleOutOfRange:    return "ScaleOutOfRange";
        case ErrorCode::NoDominantPeak:     return "NoDominantPeak";
        case ErrorCode::TooFewPeaks:        return "TooFewPeaks";
        case ErrorCode::IllPosedFit:        return "IllPosedFit";
        case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorCode::GridImageMismatch:  return "GridImageMismatch";
        case ErrorCode::DegenerateOutput:   return "DegenerateOutput";
        case ErrorCode::TensorDimMismatch:  return "TensorDimMismatch";
        case ErrorCode::SingularMatrix:     return "SingularMatrix";
        case ErrorCode::SourceTooNarrow:    return "SourceTooNarrow";
        case ErrorCode::DimMismatch:        return "DimMismatch";
        case ErrorCode::CorpusEmpty:        return "CorpusEmpty";
        case ErrorCode::BadConfig:          return "BadConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lenticolor
