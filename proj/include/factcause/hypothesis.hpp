#pragma once

#include <array>
#include <string_view>

namespace factcause {

/// The three heuristics whose effect on predictions is estimated.
enum class Hypothesis { Utt, Poc, Soc };

inline constexpr std::array<Hypothesis, 3> kAllHypotheses = {Hypothesis::Utt, Hypothesis::Poc, Hypothesis::Soc};

std::string_view hypothesis_name(Hypothesis h);
/// Accepts "utt", "poc", "soc"; throws InvalidConfig otherwise.
Hypothesis parse_hypothesis(std::string_view name);

} // namespace factcause
