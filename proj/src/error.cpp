#include "factcause/error.hpp"

namespace factcause {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::CyclicGraph: return "CyclicGraph";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::OverlappingSets: return "OverlappingSets";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::NonBinary: return "NonBinary";
    case Errc::PositivityViolation: return "PositivityViolation";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::IoFailure: return "IoFailure";
    case Errc::EncodingError: return "EncodingError";
    case Errc::FormatError: return "FormatError";
    case Errc::MalformedPattern: return "MalformedPattern";
    case Errc::EmptyCandidateSet: return "EmptyCandidateSet";
    case Errc::ParseError: return "ParseError";
    case Errc::EmptyKb: return "EmptyKb";
    case Errc::InvalidKb: return "InvalidKb";
    case Errc::UnknownRelation: return "UnknownRelation";
    case Errc::CandidateViolation: return "CandidateViolation";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::MissingStats: return "MissingStats";
    case Errc::MissingReference: return "MissingReference";
    case Errc::MissingPrediction: return "MissingPrediction";
    case Errc::EmptyPopulation: return "EmptyPopulation";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::AdjustmentMismatch: return "AdjustmentMismatch";
    }
    return "Unknown";
}

bool is_estimation_error(Errc code) {
    switch (code) {
    case Errc::EmptyTable:
    case Errc::NonBinary:
    case Errc::PositivityViolation:
    case Errc::NotNormalized:
    case Errc::EmptyPopulation:
    case Errc::AdjustmentMismatch:
        return true;
    default:
        return false;
    }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

} // namespace factcause
