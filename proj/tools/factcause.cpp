#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "factcause/error.hpp"
#include "factcause/pipeline.hpp"

namespace fs = std::filesystem;
using namespace factcause;

namespace {

struct ConfigOptions {
    std::string config_file;
    std::map<std::string, std::string> values;
    CLI::App* app = nullptr;

    void attach(CLI::App* sub) {
        app = sub;
        sub->add_option("--config", config_file, "Flat key = value configuration file")->check(CLI::ExistingFile);
        for (const auto& key : config_keys()) {
            sub->add_option((key == "output" ? "-o,--" : "--") + key, values[key]);
        }
    }

    RunConfig resolve() const {
        RunConfig c = config_file.empty() ? RunConfig{} : load_config(config_file);
        for (const auto& key : config_keys())
            if (app->count("--" + key) > 0) set_config_value(c, key, values.at(key));
        return c;
    }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw Error(Errc::IoFailure, "cannot write '" + path + "'");
    return file;
}

int finish(std::ostream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "failed writing '" + (path.empty() ? std::string("<stdout>") : path) + "'");
    return 0;
}

void print_drops(const MatchedPopulation& pop) {
    const auto& d = pop.drops;
    std::cerr << hypothesis_name(pop.hypothesis) << ": " << pop.rows.size() << " rows, " << pop.pairs.size()
              << " pairs, " << d.unmatched_treated << " unmatched treated, " << d.below_frequency
              << " below frequency, " << d.no_cooccurrence << " without co-occurrence\n";
    for (const auto& s : d.unmatched_sample) std::cerr << "  unmatched: " << s << '\n';
}

int report_status(const EffectReport& report) {
    for (const auto& r : report.results)
        if (!r.error_code.empty()) std::cerr << "error: " << hypothesis_name(r.hypothesis) << ": " << r.error << '\n';
    for (const auto& s : report.series)
        if (!s.error.empty()) std::cerr << "error: checkpoint " << s.label << ": " << s.error << '\n';
    if (!report.has_errors()) return 0;
    for (const auto& r : report.results)
        if (!r.error_code.empty()) return 2;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal effect estimation for knowledge probing predictions"};
    app.require_subcommand(1);

    auto* index_cmd = app.add_subcommand("index", "Build a sentence index from a corpus file or directory");
    std::string corpus_path;
    std::string index_out;
    unsigned index_threads = 1;
    index_cmd->add_option("corpus", corpus_path)->required();
    index_cmd->add_option("-o,--output", index_out)->required();
    index_cmd->add_option("--threads", index_threads)->check(CLI::PositiveNumber);

    auto* stats_cmd = app.add_subcommand("stats", "Dump co-occurrence counts for the knowledge base candidates");
    std::string stats_index;
    bool stats_poc = false;
    ConfigOptions stats_opts;
    stats_cmd->add_option("index_file", stats_index, "Index built by the index subcommand");
    stats_cmd->add_flag("--poc", stats_poc, "Pattern-object counts instead of subject-object counts");
    stats_opts.attach(stats_cmd);

    auto* build_cmd = app.add_subcommand("build-population", "Emit the matched population table of a hypothesis");
    std::string build_what;
    std::string queries_out;
    ConfigOptions build_opts;
    build_cmd->add_option("hypothesis", build_what, "utt, poc, soc or all")->required();
    build_cmd->add_option("--queries", queries_out, "Also write the cloze queries (a directory for 'all')");
    build_opts.attach(build_cmd);

    auto* estimate_cmd = app.add_subcommand("estimate", "Estimate the effect of each hypothesis");
    ConfigOptions estimate_opts;
    estimate_opts.attach(estimate_cmd);

    auto* dynamics_cmd = app.add_subcommand("dynamics", "Estimate effects for every checkpoint prediction file");
    std::string checkpoint_dir;
    ConfigOptions dynamics_opts;
    dynamics_cmd->add_option("--checkpoints", checkpoint_dir)->required();
    dynamics_opts.attach(dynamics_cmd);

    auto* report_cmd = app.add_subcommand("report", "Render a structured report in another format");
    std::string report_in;
    std::string report_format = "table";
    std::string report_out;
    report_cmd->add_option("report", report_in)->required();
    report_cmd->add_option("--format", report_format);
    report_cmd->add_option("-o,--output", report_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*index_cmd) {
            const auto idx = build_index(corpus_path, index_threads);
            idx.save(index_out);
            std::cerr << idx.num_sentences() << " sentences indexed\n";
            return 0;
        }
        if (*stats_cmd) {
            auto config = stats_opts.resolve();
            if (!stats_index.empty()) config.index = stats_index;
            const auto inputs = load_inputs(config);
            std::ofstream file;
            auto& out = open_output(config.output, file);
            const auto& kb = inputs.kb;
            if (stats_poc) {
                out << "relation\ttemplate\tobject\tpoc_count\n";
                for (const auto& rel : kb.relations())
                    for (const auto* p : kb.patterns_for(rel, true))
                        for (const auto& [obj, n] : poc_counts(inputs.index, p->pattern, kb.candidates(rel)))
                            out << rel << '\t' << p->pattern.text() << '\t' << obj << '\t' << n << '\n';
            } else {
                out << "relation\tsubject\tobject\tsoc_count\n";
                for (const auto& rel : kb.relations())
                    for (const auto& s : kb.subjects(rel))
                        for (const auto& [obj, n] : soc_counts(inputs.index, s, kb.candidates(rel)))
                            out << rel << '\t' << s << '\t' << obj << '\t' << n << '\n';
            }
            return finish(out, config.output);
        }
        if (*build_cmd) {
            const auto config = build_opts.resolve();
            std::vector<Hypothesis> hyps;
            if (build_what == "all")
                hyps.assign(kAllHypotheses.begin(), kAllHypotheses.end());
            else
                hyps.push_back(parse_hypothesis(build_what));
            const bool many = hyps.size() > 1;
            if (many && config.output.empty())
                throw Error(Errc::InvalidConfig, "'all' needs an output directory (--output)");
            if (many) fs::create_directories(config.output);
            if (many && !queries_out.empty()) fs::create_directories(queries_out);
            const auto inputs = load_inputs(config);
            std::optional<PredictionSet> file_predictions;
            if (!config.predictions.empty()) file_predictions = load_predictions(config.predictions, inputs.kb);
            for (auto h : hyps) {
                auto pop = population_for(h, inputs, config);
                print_drops(pop);
                if (file_predictions) score_population(pop, *file_predictions);
                else if (!config.baseline.empty()) score_population(pop, baseline_for(h, pop, inputs, config));
                const std::string name(hypothesis_name(h));
                const std::string path = many ? (fs::path(config.output) / (name + ".tsv")).string() : config.output;
                std::ofstream file;
                auto& out = open_output(path, file);
                write_population(out, pop);
                finish(out, path);
                if (!queries_out.empty()) {
                    const std::string qpath = many ? (fs::path(queries_out) / (name + ".jsonl")).string() : queries_out;
                    std::ofstream qfile;
                    auto& qout = open_output(qpath, qfile);
                    write_queries(qout, pop, config.mask_token);
                    finish(qout, qpath);
                }
            }
            return 0;
        }
        if (*estimate_cmd) {
            const auto config = estimate_opts.resolve();
            const auto report = run_estimate(config);
            emit_report(config.output, report, config.format);
            return report_status(report);
        }
        if (*dynamics_cmd) {
            const auto config = dynamics_opts.resolve();
            const auto report = run_dynamics(config, list_checkpoints(checkpoint_dir));
            emit_report(config.output, report, config.format);
            return report_status(report);
        }
        if (*report_cmd) {
            const auto report = load_report(report_in);
            emit_report(report_out, report, parse_report_format(report_format));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_estimation_error(e.code()) ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: IoFailure: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
