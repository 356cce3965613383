#pragma once

#include <stdexcept>
#include <string>

namespace ibis {

enum class ErrorKind {
    // dataset loading / validation
    MissingEmbedding,
    DanglingJudgement,
    DimensionMismatch,
    MalformedRecord,
    EmptyGroup,
    // memory model
    ZeroVector,
    EmptyOccurrences,
    EmptyOption,
    UnsortedTrials,
    // similarity scoring
    NoJudgements,
    DegenerateDenominator,
    ZeroAfterWeighting,
    ZeroAfterMasking,
    WeightNotOnSimplex,
    DegenerateBlend,
    // fitting
    BadConfig,
    InsufficientData,
    NonFiniteLoss,
    NonFiniteGradient,
    KTooLarge,
    MisalignedPoints,
    // evaluation
    EmptyPoints,
    EmptyEval,
    NonFiniteScore,
    SingleClass,
    TooFewPerCategory,
    TooFewJudgements,
    EmptyTrace,
    // command line / io
    UnknownParticipant,
    MissingArtifact,
    IoFailure,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingEmbedding: return "MissingEmbedding";
        case ErrorKind::DanglingJudgement: return "DanglingJudgement";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::MalformedRecord: return "MalformedRecord";
        case ErrorKind::EmptyGroup: return "EmptyGroup";
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::EmptyOccurrences: return "EmptyOccurrences";
        case ErrorKind::EmptyOption: return "EmptyOption";
        case ErrorKind::UnsortedTrials: return "UnsortedTrials";
        case ErrorKind::NoJudgements: return "NoJudgements";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::ZeroAfterWeighting: return "ZeroAfterWeighting";
        case ErrorKind::ZeroAfterMasking: return "ZeroAfterMasking";
        case ErrorKind::WeightNotOnSimplex: return "WeightNotOnSimplex";
        case ErrorKind::DegenerateBlend: return "DegenerateBlend";
        case ErrorKind::BadConfig: return "BadConfig";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::MisalignedPoints: return "MisalignedPoints";
        case ErrorKind::EmptyPoints: return "EmptyPoints";
        case ErrorKind::EmptyEval: return "EmptyEval";
        case ErrorKind::NonFiniteScore: return "NonFiniteScore";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::TooFewPerCategory: return "TooFewPerCategory";
        case ErrorKind::TooFewJudgements: return "TooFewJudgements";
        case ErrorKind::EmptyTrace: return "EmptyTrace";
        case ErrorKind::UnknownParticipant: return "UnknownParticipant";
        case ErrorKind::MissingArtifact: return "MissingArtifact";
        case ErrorKind::IoFailure: return "IoFailure";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.
inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonFiniteLoss:
        case ErrorKind::NonFiniteGradient:
        case ErrorKind::NonFiniteScore:
        case ErrorKind::DegenerateBlend:
        case ErrorKind::DegenerateDenominator:
            return 3;
        default:
            return 2;
    }
}

} // namespace ibis
