#include "factcause/backdoor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "factcause/error.hpp"

namespace factcause {

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational to_rational(double v) {
    if (!std::isfinite(v)) throw Error(Errc::FormatError, "non-finite value has no rational form");
    int exponent = 0;
    const double mantissa = std::frexp(v, &exponent);
    // mantissa * 2^53 is an integer for every double
    const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    Rational r(scaled);
    exponent -= 53;
    const boost::multiprecision::cpp_int two = 2;
    if (exponent >= 0)
        r *= Rational(boost::multiprecision::pow(two, static_cast<unsigned>(exponent)));
    else
        r /= Rational(boost::multiprecision::pow(two, static_cast<unsigned>(-exponent)));
    return r;
}

double DoEstimate::p(std::string_view treatment_value) const {
    auto it = probability.find(std::string(treatment_value));
    if (it == probability.end())
        throw Error(Errc::PositivityViolation, "no estimate for treatment value '" + std::string(treatment_value) + "'");
    return to_double(it->second);
}

namespace {

bool outcome_positive(const std::string& v, std::string_view column) {
    if (v == "1") return true;
    if (v == "0") return false;
    throw Error(Errc::NonBinary, "outcome column '" + std::string(column) + "' has value '" + v + "'");
}

void check_adjustment(std::string_view treatment, std::string_view outcome, const std::vector<std::string>& z) {
    if (treatment == outcome) throw Error(Errc::OverlappingSets, "treatment and outcome are the same column");
    for (const auto& name : z)
        if (name == treatment || name == outcome)
            throw Error(Errc::OverlappingSets, "adjustment set contains '" + name + "'");
}

// Per-stratum masses; arms are indexed by treatment value.
struct StratumMass {
    Rational total;
    std::map<std::string, Rational> arm;
    std::map<std::string, Rational> arm_positive;
};

DoEstimate combine(const std::map<std::vector<std::string>, StratumMass>& strata,
                   const std::vector<std::string>& arms) {
    Rational grand;
    for (const auto& [key, s] : strata) grand += s.total;
    if (grand == 0) throw Error(Errc::EmptyTable, "population has zero total mass");

    DoEstimate est;
    for (const auto& x : arms) {
        Rational weighted;
        Rational mass;
        for (const auto& [key, s] : strata) {
            auto it = s.arm.find(x);
            if (it == s.arm.end() || it->second == 0) continue;
            const Rational share = s.total / grand;
            weighted += (s.arm_positive.at(x) / it->second) * share;
            mass += share;
        }
        est.arm_mass[x] = mass;
        if (mass > 0) est.probability[x] = weighted / mass;
    }
    for (const auto& [key, s] : strata) {
        const bool all_arms = std::all_of(arms.begin(), arms.end(), [&](const std::string& x) {
            auto it = s.arm.find(x);
            return it != s.arm.end() && it->second > 0;
        });
        if (all_arms) est.covered_mass += s.total / grand;
    }
    est.positivity_violation = est.covered_mass != 1;
    return est;
}

} // namespace

DoEstimate interventional_prob(const ObservationTable& table, std::string_view treatment, std::string_view outcome,
                               const std::vector<std::string>& z) {
    check_adjustment(treatment, outcome, z);
    const std::size_t tcol = table.column_index(treatment);
    const std::size_t ocol = table.column_index(outcome);
    std::vector<std::size_t> zcols;
    for (const auto& name : z) zcols.push_back(table.column_index(name));
    if (table.num_rows() == 0) throw Error(Errc::EmptyTable, "table has no rows");

    std::map<std::vector<std::string>, StratumMass> strata;
    std::vector<std::string> key(zcols.size());
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
        for (std::size_t k = 0; k < zcols.size(); ++k) key[k] = table.value(r, zcols[k]);
        const bool positive = outcome_positive(table.value(r, ocol), outcome);
        const Rational w = table.weight(r) == 1.0 ? Rational(1) : to_rational(table.weight(r));
        auto& s = strata[key];
        const auto& x = table.value(r, tcol);
        s.total += w;
        s.arm[x] += w;
        if (positive) s.arm_positive[x] += w;
        else s.arm_positive[x] += 0;
    }
    std::vector<std::string> arms = table.domain(tcol);
    std::sort(arms.begin(), arms.end());
    return combine(strata, arms);
}

EffectEstimate estimate_ate(const ObservationTable& table, std::string_view treatment, std::string_view outcome,
                            const std::vector<std::string>& z) {
    const std::size_t tcol = table.column_index(treatment);
    for (const auto& v : table.domain(tcol))
        if (v != "0" && v != "1")
            throw Error(Errc::NonBinary, "treatment column '" + std::string(treatment) + "' has value '" + v + "'");
    EffectEstimate out{Rational(0), interventional_prob(table, treatment, outcome, z)};
    for (const char* arm : {"0", "1"})
        if (!out.detail.probability.count(arm))
            throw Error(Errc::PositivityViolation,
                        std::string("no rows with positive weight in arm ") + arm + " of '" + std::string(treatment) + "'");
    out.ate_fraction = out.detail.probability.at("1") - out.detail.probability.at("0");
    return out;
}

double ate(const ObservationTable& table, std::string_view treatment, std::string_view outcome,
           const std::vector<std::string>& z) {
    return estimate_ate(table, treatment, outcome, z).percent();
}

std::vector<GroupEffect> cate(const ObservationTable& table, std::string_view group, std::string_view treatment,
                              std::string_view outcome, const std::vector<std::string>& z) {
    const std::size_t gcol = table.column_index(group);
    table.column_index(treatment);
    table.column_index(outcome);
    for (const auto& name : z) {
        table.column_index(name);
        if (name == group) throw Error(Errc::OverlappingSets, "group column is part of the adjustment set");
    }
    std::map<std::string, std::vector<std::size_t>> parts;
    for (std::size_t r = 0; r < table.num_rows(); ++r) parts[table.value(r, gcol)].push_back(r);

    std::vector<GroupEffect> out;
    for (const auto& [value, rows] : parts) {
        GroupEffect g;
        g.group = value;
        g.rows = rows.size();
        try {
            const auto est = estimate_ate(table.subset(rows), treatment, outcome, z);
            g.ate = est.percent();
            g.covered_mass = to_double(est.detail.covered_mass);
        } catch (const Error& e) {
            g.reason = e.what();
        }
        out.push_back(std::move(g));
    }
    return out;
}

JointDistribution empirical_joint(const ObservationTable& table, const std::vector<std::string>& columns) {
    std::vector<std::size_t> cols;
    for (const auto& c : columns) cols.push_back(table.column_index(c));
    std::map<std::vector<std::string>, Rational> mass;
    Rational total;
    std::vector<std::string> key(cols.size());
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
        for (std::size_t k = 0; k < cols.size(); ++k) key[k] = table.value(r, cols[k]);
        const Rational w = to_rational(table.weight(r));
        mass[key] += w;
        total += w;
    }
    if (total == 0) throw Error(Errc::EmptyTable, "table has zero total weight");
    JointDistribution joint{columns, {}};
    for (auto& [values, m] : mass) joint.atoms.push_back({values, m / total});
    return joint;
}

DoEstimate exact_joint_do(const JointDistribution& joint, std::string_view treatment, std::string_view outcome,
                          const std::vector<std::string>& z) {
    check_adjustment(treatment, outcome, z);
    auto position = [&](std::string_view name) {
        for (std::size_t i = 0; i < joint.variables.size(); ++i)
            if (joint.variables[i] == name) return i;
        throw Error(Errc::UnknownColumn, "joint has no variable '" + std::string(name) + "'");
    };
    const std::size_t xi = position(treatment);
    const std::size_t yi = position(outcome);
    std::vector<std::size_t> zi;
    for (const auto& name : z) zi.push_back(position(name));

    Rational total;
    for (const auto& atom : joint.atoms) {
        if (atom.values.size() != joint.variables.size())
            throw Error(Errc::FormatError, "joint atom arity does not match its variables");
        if (atom.probability < 0) throw Error(Errc::NotNormalized, "negative probability in joint");
        total += atom.probability;
    }
    const Rational tolerance(1, 1000000000000LL);
    if (abs(total - 1) > tolerance)
        throw Error(Errc::NotNormalized, "joint mass is " + std::to_string(to_double(total)));

    // Marginals P(Z=z), P(X=x, Z=z) and P(X=x, Z=z, Y=1) by summing atoms.
    using Key = std::vector<std::string>;
    std::map<Key, Rational> p_z;
    std::map<std::pair<std::string, Key>, Rational> p_xz;
    std::map<std::pair<std::string, Key>, Rational> p_xz_y1;
    std::set<std::string> arms;
    Key key(zi.size());
    for (const auto& atom : joint.atoms) {
        for (std::size_t k = 0; k < zi.size(); ++k) key[k] = atom.values[zi[k]];
        const auto& x = atom.values[xi];
        arms.insert(x);
        p_z[key] += atom.probability;
        p_xz[{x, key}] += atom.probability;
        if (outcome_positive(atom.values[yi], outcome)) p_xz_y1[{x, key}] += atom.probability;
    }

    DoEstimate est;
    for (const auto& x : arms) {
        Rational sum;
        Rational mass;
        for (const auto& [z_value, pz] : p_z) {
            auto it = p_xz.find({x, z_value});
            if (it == p_xz.end() || it->second == 0) continue;
            auto pos = p_xz_y1.find({x, z_value});
            const Rational conditional = pos == p_xz_y1.end() ? Rational(0) : pos->second / it->second;
            sum += conditional * pz;
            mass += pz;
        }
        est.arm_mass[x] = mass;
        if (mass > 0) est.probability[x] = sum / mass;
    }
    for (const auto& [z_value, pz] : p_z) {
        bool everywhere = true;
        for (const auto& x : arms) {
            auto it = p_xz.find({x, z_value});
            everywhere = everywhere && it != p_xz.end() && it->second > 0;
        }
        if (everywhere) est.covered_mass += pz;
    }
    est.positivity_violation = est.covered_mass != total;
    return est;
}

} // namespace factcause
