#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "factcause/observation_table.hpp"

namespace factcause {

using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);
/// Exact conversion; every finite double is a dyadic rational.
Rational to_rational(double v);

/// Interventional outcome probabilities from the backdoor sum
///   P(Y=1 | do(X=x)) = sum_z P(Y=1 | X=x, Z=z) P(Z=z).
///
/// A stratum z with no rows in arm x cannot contribute P(Y | X=x, Z=z);
/// arm x then sums over the strata it does cover and divides by that mass
/// (`arm_mass`). `covered_mass` is the stratum mass with rows in every arm.
struct DoEstimate {
    std::map<std::string, Rational> probability;
    std::map<std::string, Rational> arm_mass;
    Rational covered_mass;
    bool positivity_violation = false;

    double p(std::string_view treatment_value) const;
    friend bool operator==(const DoEstimate&, const DoEstimate&) = default;
};

/// Throws UnknownColumn, OverlappingSets when z contains the treatment or
/// outcome, NonBinary when the outcome is not 0/1, EmptyTable when the total
/// weight is zero.
DoEstimate interventional_prob(const ObservationTable& table, std::string_view treatment,
                               std::string_view outcome, const std::vector<std::string>& z);

struct EffectEstimate {
    Rational ate_fraction;  // P(do(1)) - P(do(0))
    DoEstimate detail;

    double percent() const { return 100.0 * to_double(ate_fraction); }
};

/// Treated minus control, as a percentage in [-100, 100]. The treatment must
/// be binary with positive mass in both arms (PositivityViolation otherwise).
EffectEstimate estimate_ate(const ObservationTable& table, std::string_view treatment, std::string_view outcome,
                            const std::vector<std::string>& z);
double ate(const ObservationTable& table, std::string_view treatment, std::string_view outcome,
           const std::vector<std::string>& z);

struct GroupEffect {
    std::string group;
    std::size_t rows = 0;
    std::optional<double> ate;
    std::optional<double> covered_mass;
    std::string reason;  // set when ate is empty

    bool operator==(const GroupEffect&) const = default;
};

/// ATE within each value of `group`, ordered by group value. Partitions whose
/// estimate fails carry no value and the failure reason.
std::vector<GroupEffect> cate(const ObservationTable& table, std::string_view group, std::string_view treatment,
                              std::string_view outcome, const std::vector<std::string>& z);

/// A full joint distribution over named discrete variables, one atom per
/// configuration.
struct JointDistribution {
    struct Atom {
        std::vector<std::string> values;
        Rational probability;
    };
    std::vector<std::string> variables;
    std::vector<Atom> atoms;
};

/// Empirical joint over `columns`: one atom per distinct row configuration,
/// weighted by its share of the total row weight.
JointDistribution empirical_joint(const ObservationTable& table, const std::vector<std::string>& columns);

/// Backdoor sum evaluated directly on a joint distribution, with the same
/// per-arm coverage convention as interventional_prob. Throws NotNormalized
/// when the total mass differs from 1 by more than 1e-12.
DoEstimate exact_joint_do(const JointDistribution& joint, std::string_view treatment, std::string_view outcome,
                          const std::vector<std::string>& z);

} // namespace factcause
