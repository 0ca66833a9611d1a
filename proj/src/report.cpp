#include "factcause/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "factcause/error.hpp"

namespace factcause {

const HypothesisResult* EffectReport::find(Hypothesis h) const {
    for (const auto& r : results)
        if (r.hypothesis == h) return &r;
    return nullptr;
}

bool EffectReport::has_errors() const {
    for (const auto& r : results)
        if (!r.error_code.empty()) return true;
    for (const auto& s : series)
        if (!s.error.empty()) return true;
    return false;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "table") return ReportFormat::Table;
    if (name == "structured" || name == "json") return ReportFormat::Structured;
    if (name == "delimited" || name == "tsv") return ReportFormat::Delimited;
    throw Error(Errc::InvalidConfig, "unknown report format '" + std::string(name) + "'");
}

std::string_view report_format_name(ReportFormat f) {
    switch (f) {
    case ReportFormat::Table: return "table";
    case ReportFormat::Structured: return "structured";
    case ReportFormat::Delimited: return "delimited";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error(Errc::FormatError, "cannot format number");
    return std::string(buf, end);
}

namespace {

using ojson = nlohmann::ordered_json;

template <class T>
ojson opt(const std::optional<T>& v) {
    return v ? ojson(*v) : ojson(nullptr);
}

template <class T>
std::optional<T> opt_get(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

ojson drops_json(const DropReport& d) {
    ojson j;
    j["unmatched_treated"] = d.unmatched_treated;
    j["unmatched_sample"] = d.unmatched_sample;
    j["below_frequency"] = d.below_frequency;
    j["no_cooccurrence"] = d.no_cooccurrence;
    return j;
}

std::string fixed2(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v == 0.0 ? 0.0 : *v);
    return buf;
}

std::string pad(std::string s, std::size_t width, bool left) {
    if (s.size() >= width) return s;
    const std::string fill(width - s.size(), ' ');
    return left ? s + fill : fill + s;
}

void write_grid(std::ostream& out, const std::vector<std::vector<std::string>>& grid) {
    if (grid.empty()) return;
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    for (const auto& row : grid) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) line += "  ";
            line += pad(row[c], width[c], c == 0);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
}

void emit_table(std::ostream& out, const EffectReport& report) {
    std::vector<std::string> names;
    for (const auto& r : report.results) names.emplace_back(hypothesis_name(r.hypothesis));
    if (!report.results.empty()) {
        std::vector<std::vector<std::string>> grid;
        grid.push_back({"model"});
        grid.push_back({report.model.empty() ? "-" : report.model});
        for (const auto& r : report.results) {
            grid[0].emplace_back(hypothesis_name(r.hypothesis));
            grid[1].push_back(fixed2(r.ate));
        }
        write_grid(out, grid);

        std::set<std::string> relations;
        for (const auto& r : report.results)
            for (const auto& g : r.cate) relations.insert(g.group);
        if (!relations.empty()) {
            out << '\n';
            std::vector<std::vector<std::string>> cgrid;
            cgrid.push_back({"relation"});
            for (const auto& n : names) cgrid[0].push_back(n);
            for (const auto& rel : relations) {
                std::vector<std::string> row{rel};
                for (const auto& r : report.results) {
                    auto it = std::find_if(r.cate.begin(), r.cate.end(), [&](const GroupEffect& g) { return g.group == rel; });
                    row.push_back(it == r.cate.end() ? "-" : fixed2(it->ate));
                }
                cgrid.push_back(std::move(row));
            }
            write_grid(out, cgrid);
        }
        bool noted = false;
        for (const auto& r : report.results) {
            if (r.error.empty() && !r.positivity_violation) continue;
            if (!noted) out << '\n';
            noted = true;
            out << hypothesis_name(r.hypothesis) << ": "
                << (r.error.empty() ? "covered mass " + fixed2(r.covered_mass) : r.error) << '\n';
        }
    }
    if (!report.series.empty()) {
        if (!report.results.empty()) out << '\n';
        std::set<std::string> hyps;
        for (const auto& s : report.series)
            for (const auto& [h, v] : s.ate) hyps.insert(h);
        std::vector<std::string> order;
        for (auto h : kAllHypotheses)
            if (hyps.count(std::string(hypothesis_name(h)))) order.emplace_back(hypothesis_name(h));
        std::vector<std::vector<std::string>> grid;
        grid.push_back({"checkpoint", "label"});
        for (const auto& h : order) grid[0].push_back(h);
        grid[0].push_back("accuracy");
        for (const auto& s : report.series) {
            std::vector<std::string> row{std::to_string(s.index), s.label};
            for (const auto& h : order) {
                auto it = s.ate.find(h);
                row.push_back(it == s.ate.end() ? "-" : fixed2(it->second));
            }
            row.push_back(fixed2(s.accuracy));
            grid.push_back(std::move(row));
        }
        write_grid(out, grid);
        for (const auto& s : report.series)
            if (!s.error.empty()) out << s.label << ": " << s.error << '\n';
    }
}

std::string num(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void emit_delimited(std::ostream& out, const EffectReport& report) {
    if (report.series.empty()) {
        out << "hypothesis\tgroup\tate\tcovered_mass\trows\n";
        for (const auto& r : report.results) {
            out << hypothesis_name(r.hypothesis) << "\tALL\t" << num(r.ate) << '\t' << num(r.covered_mass) << '\t'
                << r.rows << '\n';
            for (const auto& g : r.cate)
                out << hypothesis_name(r.hypothesis) << '\t' << g.group << '\t' << num(g.ate) << '\t'
                    << num(g.covered_mass) << '\t' << g.rows << '\n';
        }
        return;
    }
    out << "checkpoint\tlabel\thypothesis\tate\taccuracy\n";
    for (const auto& s : report.series)
        for (const auto& [h, v] : s.ate)
            out << s.index << '\t' << s.label << '\t' << h << '\t' << num(v) << '\t' << num(s.accuracy) << '\n';
}

} // namespace

nlohmann::ordered_json report_to_json(const EffectReport& report) {
    ojson j;
    j["model"] = report.model;
    ojson results = ojson::array();
    for (const auto& r : report.results) {
        ojson jr;
        jr["hypothesis"] = hypothesis_name(r.hypothesis);
        jr["source_id"] = r.source_id;
        jr["treatment"] = r.treatment;
        jr["outcome"] = r.outcome;
        jr["adjustment"] = r.adjustment;
        jr["ate"] = opt(r.ate);
        jr["ate_exact"] = opt(r.ate_exact);
        jr["covered_mass"] = opt(r.covered_mass);
        jr["arm_mass"] = r.arm_mass;
        jr["do_probability"] = r.do_probability;
        jr["positivity_violation"] = r.positivity_violation;
        jr["rows"] = r.rows;
        jr["pairs"] = r.pairs;
        jr["drops"] = drops_json(r.drops);
        ojson cate = ojson::array();
        for (const auto& g : r.cate) {
            ojson jg;
            jg["group"] = g.group;
            jg["rows"] = g.rows;
            jg["ate"] = opt(g.ate);
            jg["covered_mass"] = opt(g.covered_mass);
            jg["reason"] = g.reason;
            cate.push_back(std::move(jg));
        }
        jr["cate"] = std::move(cate);
        jr["error_code"] = r.error_code;
        jr["error"] = r.error;
        results.push_back(std::move(jr));
    }
    j["results"] = std::move(results);
    ojson series = ojson::array();
    for (const auto& s : report.series) {
        ojson js;
        js["index"] = s.index;
        js["label"] = s.label;
        ojson ate = ojson::object();
        for (const auto& [h, v] : s.ate) ate[h] = opt(v);
        js["ate"] = std::move(ate);
        js["accuracy"] = opt(s.accuracy);
        js["error"] = s.error;
        series.push_back(std::move(js));
    }
    j["series"] = std::move(series);
    return j;
}

EffectReport report_from_json(const nlohmann::json& j) {
    try {
        EffectReport report;
        report.model = j.at("model").get<std::string>();
        for (const auto& jr : j.at("results")) {
            HypothesisResult r;
            r.hypothesis = parse_hypothesis(jr.at("hypothesis").get<std::string>());
            r.source_id = jr.at("source_id").get<std::string>();
            r.treatment = jr.at("treatment").get<std::string>();
            r.outcome = jr.at("outcome").get<std::string>();
            r.adjustment = jr.at("adjustment").get<std::vector<std::string>>();
            r.ate = opt_get<double>(jr, "ate");
            r.ate_exact = opt_get<std::string>(jr, "ate_exact");
            r.covered_mass = opt_get<double>(jr, "covered_mass");
            r.arm_mass = jr.at("arm_mass").get<std::map<std::string, double>>();
            r.do_probability = jr.at("do_probability").get<std::map<std::string, double>>();
            r.positivity_violation = jr.at("positivity_violation").get<bool>();
            r.rows = jr.at("rows").get<std::size_t>();
            r.pairs = jr.at("pairs").get<std::size_t>();
            const auto& d = jr.at("drops");
            r.drops.unmatched_treated = d.at("unmatched_treated").get<std::size_t>();
            r.drops.unmatched_sample = d.at("unmatched_sample").get<std::vector<std::string>>();
            r.drops.below_frequency = d.at("below_frequency").get<std::size_t>();
            r.drops.no_cooccurrence = d.at("no_cooccurrence").get<std::size_t>();
            for (const auto& jg : jr.at("cate")) {
                GroupEffect g;
                g.group = jg.at("group").get<std::string>();
                g.rows = jg.at("rows").get<std::size_t>();
                g.ate = opt_get<double>(jg, "ate");
                g.covered_mass = opt_get<double>(jg, "covered_mass");
                g.reason = jg.at("reason").get<std::string>();
                r.cate.push_back(std::move(g));
            }
            r.error_code = jr.at("error_code").get<std::string>();
            r.error = jr.at("error").get<std::string>();
            report.results.push_back(std::move(r));
        }
        for (const auto& js : j.at("series")) {
            SeriesEntry s;
            s.index = js.at("index").get<std::size_t>();
            s.label = js.at("label").get<std::string>();
            for (const auto& [h, v] : js.at("ate").items())
                s.ate[h] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            s.accuracy = opt_get<double>(js, "accuracy");
            s.error = js.at("error").get<std::string>();
            report.series.push_back(std::move(s));
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::FormatError, std::string("malformed report: ") + e.what());
    }
}

void emit_report(std::ostream& out, const EffectReport& report, ReportFormat format) {
    switch (format) {
    case ReportFormat::Table: emit_table(out, report); break;
    case ReportFormat::Structured: out << report_to_json(report).dump(2) << '\n'; break;
    case ReportFormat::Delimited: emit_delimited(out, report); break;
    }
}

void emit_report(const std::filesystem::path& path, const EffectReport& report, ReportFormat format) {
    if (path.empty()) {
        emit_report(std::cout, report, format);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoFailure, "cannot write report to '" + path.string() + "'");
    emit_report(out, report, format);
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "failed writing report to '" + path.string() + "'");
}

EffectReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot read report '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, path.string() + ": " + e.what());
    }
    return report_from_json(j);
}

} // namespace factcause
