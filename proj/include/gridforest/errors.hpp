#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridforest {

enum class ErrorKind {
    Parse,
    Validation,
    NonPositiveBase,
    UnknownBus,
    UnknownEdge,
    NotRadial,
    NotForest,
    NotConverged,
    Disconnected,
    InsufficientGeneration,
    UnreachableBus,
    StrandedBuses,
    AllCandidatesInfeasible,
    RepairFailed,
    TooLarge,
    NoFeasibleForest,
    NoFeasibleSolution,
    KappaTooLarge,
    NoSwapAvailable,
    InvalidParams,
    Io,
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Parse: return "ParseError";
        case ErrorKind::Validation: return "ValidationError";
        case ErrorKind::NonPositiveBase: return "NonPositiveBase";
        case ErrorKind::UnknownBus: return "UnknownBus";
        case ErrorKind::UnknownEdge: return "UnknownEdge";
        case ErrorKind::NotRadial: return "NotRadial";
        case ErrorKind::NotForest: return "NotForest";
        case ErrorKind::NotConverged: return "NotConverged";
        case ErrorKind::Disconnected: return "Disconnected";
        case ErrorKind::InsufficientGeneration: return "InsufficientGeneration";
        case ErrorKind::UnreachableBus: return "UnreachableBus";
        case ErrorKind::StrandedBuses: return "StrandedBuses";
        case ErrorKind::AllCandidatesInfeasible: return "AllCandidatesInfeasible";
        case ErrorKind::RepairFailed: return "RepairFailed";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::NoFeasibleForest: return "NoFeasibleForest";
        case ErrorKind::NoFeasibleSolution: return "NoFeasibleSolution";
        case ErrorKind::KappaTooLarge: return "KappaTooLarge";
        case ErrorKind::NoSwapAvailable: return "NoSwapAvailable";
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::Io: return "IoError";
    }
    return "Error";
}

class SolverError : public std::runtime_error {
  public:
    SolverError(ErrorKind kind, std::string message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw SolverError(kind, message);
}

/// Non-throwing validation finding; `path` points at the offending field,
/// e.g. "edges[0].to".
struct Issue {
    enum class Code {
        InsufficientGeneration,
        VoltageBoundsInverted,
        NegativeDemand,
        NegativeResistance,
        ZeroImpedance,
        NonPositiveCapacity,
        AngleBoundsInverted,
        PhaseMismatch,
        NoGenerators,
        DisconnectedGraph,
    };

    Code code;
    std::string path;
    std::string message;
};

inline const char* issue_code_name(Issue::Code c) {
    switch (c) {
        case Issue::Code::InsufficientGeneration: return "InsufficientGeneration";
        case Issue::Code::VoltageBoundsInverted: return "VoltageBoundsInverted";
        case Issue::Code::NegativeDemand: return "NegativeDemand";
        case Issue::Code::NegativeResistance: return "NegativeResistance";
        case Issue::Code::ZeroImpedance: return "ZeroImpedance";
        case Issue::Code::NonPositiveCapacity: return "NonPositiveCapacity";
        case Issue::Code::AngleBoundsInverted: return "AngleBoundsInverted";
        case Issue::Code::PhaseMismatch: return "PhaseMismatch";
        case Issue::Code::NoGenerators: return "NoGenerators";
        case Issue::Code::DisconnectedGraph: return "DisconnectedGraph";
    }
    return "Issue";
}

}  // namespace gridforest
