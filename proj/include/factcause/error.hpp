#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace factcause {

enum class Errc {
    CyclicGraph,
    UnknownNode,
    DuplicateNode,
    OverlappingSets,
    UnknownColumn,
    EmptyTable,
    NonBinary,
    PositivityViolation,
    NotNormalized,
    IoFailure,
    EncodingError,
    FormatError,
    MalformedPattern,
    EmptyCandidateSet,
    ParseError,
    EmptyKb,
    InvalidKb,
    UnknownRelation,
    CandidateViolation,
    DuplicateKey,
    MissingStats,
    MissingReference,
    MissingPrediction,
    EmptyPopulation,
    InvalidConfig,
    AdjustmentMismatch,
};

std::string_view errc_name(Errc code);

/// Failures that stem from estimation rather than from malformed inputs.
bool is_estimation_error(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace factcause
