#include "factcause/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "factcause/causal_graph.hpp"
#include "factcause/error.hpp"
#include "factcause/text.hpp"

namespace factcause {

namespace fs = std::filesystem;

namespace {

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
    T out{};
    const auto v = text::trim(value);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw Error(Errc::InvalidConfig, "'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
    return out;
}

BinEdges parse_bin_edges(std::string_view value) {
    const auto parts = text::split(value, ',');
    if (parts.size() != 4) throw Error(Errc::InvalidConfig, "bin_edges expects four comma-separated counts");
    BinEdges e;
    e.xs = parse_integer<Count>("bin_edges", parts[0]);
    e.s = parse_integer<Count>("bin_edges", parts[1]);
    e.m = parse_integer<Count>("bin_edges", parts[2]);
    e.l = parse_integer<Count>("bin_edges", parts[3]);
    if (!e.strictly_increasing()) throw Error(Errc::InvalidConfig, "bin_edges must be strictly increasing");
    return e;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "corpus",  "index",        "kb",        "patterns",
        "predictions", "baseline", "seed",      "utt_fallback",
        "mask_token", "min_pattern_object_frequency", "bin_edges", "tie_break",
        "format",  "output",       "cache_dir", "threads"};
    return keys;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view raw) {
    const std::string value(text::trim(raw));
    if (key == "corpus") c.corpus = value;
    else if (key == "index") c.index = value;
    else if (key == "kb") c.kb = value;
    else if (key == "patterns") c.patterns = value;
    else if (key == "predictions") c.predictions = value;
    else if (key == "baseline") {
        if (!value.empty() && value != "heuristic") parse_baseline(value);
        c.baseline = value;
    } else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "utt_fallback") c.utt_fallback = parse_utt_fallback(value);
    else if (key == "mask_token") {
        if (value.empty()) throw Error(Errc::InvalidConfig, "mask_token must not be empty");
        c.mask_token = value;
    } else if (key == "min_pattern_object_frequency") c.min_pattern_object_frequency = parse_integer<Count>(key, value);
    else if (key == "bin_edges") c.bin_edges = parse_bin_edges(value);
    else if (key == "tie_break") {
        if (value != "lexicographic")
            throw Error(Errc::InvalidConfig, "tie_break supports only 'lexicographic', got '" + value + "'");
        c.tie_break = value;
    } else if (key == "format") c.format = parse_report_format(value);
    else if (key == "output") c.output = value;
    else if (key == "cache_dir") c.cache_dir = value;
    else if (key == "threads") {
        c.threads = parse_integer<unsigned>(key, value);
        if (c.threads == 0) throw Error(Errc::InvalidConfig, "threads must be at least 1");
    } else
        throw Error(Errc::InvalidConfig, "unknown configuration key '" + std::string(key) + "'");
}

std::string get_config_value(const RunConfig& c, std::string_view key) {
    if (key == "corpus") return c.corpus;
    if (key == "index") return c.index;
    if (key == "kb") return c.kb;
    if (key == "patterns") return c.patterns;
    if (key == "predictions") return c.predictions;
    if (key == "baseline") return c.baseline;
    if (key == "seed") return std::to_string(c.seed);
    if (key == "utt_fallback") return std::string(utt_fallback_name(c.utt_fallback));
    if (key == "mask_token") return c.mask_token;
    if (key == "min_pattern_object_frequency") return std::to_string(c.min_pattern_object_frequency);
    if (key == "bin_edges")
        return std::to_string(c.bin_edges.xs) + "," + std::to_string(c.bin_edges.s) + "," +
               std::to_string(c.bin_edges.m) + "," + std::to_string(c.bin_edges.l);
    if (key == "tie_break") return c.tie_break;
    if (key == "format") return std::string(report_format_name(c.format));
    if (key == "output") return c.output;
    if (key == "cache_dir") return c.cache_dir;
    if (key == "threads") return std::to_string(c.threads);
    throw Error(Errc::InvalidConfig, "unknown configuration key '" + std::string(key) + "'");
}

void RunConfig::validate() const {
    if (kb.empty()) throw Error(Errc::InvalidConfig, "no knowledge base given (kb)");
    if (patterns.empty()) throw Error(Errc::InvalidConfig, "no pattern file given (patterns)");
    if (index.empty() && corpus.empty()) throw Error(Errc::InvalidConfig, "neither index nor corpus given");
    if (!predictions.empty() && !baseline.empty())
        throw Error(Errc::InvalidConfig, "predictions and baseline are mutually exclusive");
    if (!bin_edges.strictly_increasing()) throw Error(Errc::InvalidConfig, "bin_edges must be strictly increasing");
    if (min_pattern_object_frequency < 0) throw Error(Errc::InvalidConfig, "min_pattern_object_frequency is negative");
    for (const auto* p : {&kb, &patterns, &predictions, &corpus})
        if (!p->empty() && !fs::exists(*p)) throw Error(Errc::IoFailure, "'" + *p + "' does not exist");
    if (corpus.empty() && !fs::exists(index)) throw Error(Errc::IoFailure, "'" + index + "' does not exist");
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view content, const std::string& source) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t lineno = 0;
    for (const auto& raw : text::split(content, '\n')) {
        ++lineno;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::InvalidConfig, source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        out.emplace_back(std::string(text::trim(line.substr(0, eq))), std::string(text::trim(line.substr(eq + 1))));
    }
    return out;
}

RunConfig load_config(const fs::path& path) {
    RunConfig c;
    const auto base = path.parent_path();
    static const std::set<std::string> path_keys{"corpus", "index", "kb", "patterns", "predictions", "output", "cache_dir"};
    for (const auto& [k, v] : parse_config_text(read_file(path), path.string())) {
        if (path_keys.count(k) && !v.empty() && fs::path(v).is_relative())
            set_config_value(c, k, (base / v).lexically_normal().string());
        else
            set_config_value(c, k, v);
    }
    return c;
}

void verify_adjustment_sets() {
    const auto g = knowledge_probing_graph();
    for (auto h : kAllHypotheses) {
        const auto spec = adjustment_for(h);
        NodeSet z(spec.adjustment_nodes.begin(), spec.adjustment_nodes.end());
        if (!satisfies_backdoor(g, spec.treatment_node, spec.outcome_node, z)) {
            std::string nodes;
            for (const auto& n : spec.adjustment_nodes) nodes += (nodes.empty() ? "" : ", ") + n;
            throw Error(Errc::AdjustmentMismatch, "{" + nodes + "} does not satisfy the backdoor criterion for " +
                                                      spec.treatment_node + " -> " + spec.outcome_node);
        }
    }
}

Inputs load_inputs(const RunConfig& config) {
    auto kb = load_knowledge_base(config.kb, config.patterns);
    std::ostringstream canon;
    write_triplets(canon, kb.triplets());
    write_patterns(canon, kb.patterns());
    const auto kb_hash = text::fnv1a(canon.str());

    CorpusIndex index;
    if (!config.index.empty() && fs::is_regular_file(config.index)) {
        index = CorpusIndex::load(config.index);
    } else {
        index = build_index(config.corpus, config.threads);
        if (!config.index.empty()) index.save(config.index);
    }
    const auto index_hash = index.content_hash();
    return Inputs{std::move(kb), std::move(index), kb_hash, index_hash};
}

PopulationConfig population_config(const RunConfig& config) {
    PopulationConfig p;
    p.min_pattern_object_frequency = config.min_pattern_object_frequency;
    p.bins = config.bin_edges;
    p.threads = config.threads;
    return p;
}

MatchedPopulation population_for(Hypothesis h, const Inputs& inputs, const RunConfig& config) {
    const auto pc = population_config(config);
    fs::path cache_file;
    if (!config.cache_dir.empty()) {
        const std::string key = "population/2|" + text::hex64(inputs.kb_hash) + "|" + text::hex64(inputs.index_hash) +
                                "|" + std::string(hypothesis_name(h)) + "|" +
                                get_config_value(config, "min_pattern_object_frequency") + "|" +
                                get_config_value(config, "bin_edges") + "|" + config.tie_break;
        cache_file = fs::path(config.cache_dir) /
                     ("population-" + std::string(hypothesis_name(h)) + "-" + text::hex64(text::fnv1a(key)) + ".json");
        if (fs::is_regular_file(cache_file)) {
            try {
                return population_from_json(nlohmann::json::parse(read_file(cache_file)));
            } catch (const nlohmann::json::exception&) {
                // unreadable cache entry: rebuild below
            } catch (const Error&) {
            }
        }
    }
    auto pop = build_population(h, inputs.kb, inputs.index, pc);
    if (!cache_file.empty()) {
        std::error_code ec;
        fs::create_directories(cache_file.parent_path(), ec);
        const auto tmp = cache_file.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw Error(Errc::IoFailure, "cannot write population cache '" + tmp + "'");
            out << population_to_json(pop).dump() << '\n';
        }
        fs::rename(tmp, cache_file, ec);
        if (ec) throw Error(Errc::IoFailure, "cannot move population cache into place: " + ec.message());
    }
    return pop;
}

PredictionSet baseline_for(Hypothesis h, const MatchedPopulation& pop, const Inputs& inputs, const RunConfig& config) {
    if (config.baseline.empty()) throw Error(Errc::InvalidConfig, "neither predictions nor baseline given");
    const auto kind = config.baseline == "heuristic" ? heuristic_for(h) : parse_baseline(config.baseline);
    BaselineOptions opts;
    opts.seed = config.seed;
    opts.utt_fallback = config.utt_fallback;
    const auto keys = required_keys(pop);
    return baseline_predict(kind, inputs.kb, &inputs.index, keys, opts);
}

void write_queries(std::ostream& out, const MatchedPopulation& pop, std::string_view mask) {
    for (const auto& key : required_keys(pop)) {
        nlohmann::ordered_json j;
        j["subject"] = key.subject;
        j["relation"] = key.relation;
        j["template"] = key.template_text;
        j["cloze"] = instantiate(key.template_text, key.subject, std::nullopt, mask);
        out << j.dump() << '\n';
    }
}

HypothesisResult estimate_population(const MatchedPopulation& pop) {
    const auto spec = adjustment_for(pop.hypothesis);
    HypothesisResult r;
    r.hypothesis = pop.hypothesis;
    r.treatment = spec.treatment_node;
    r.outcome = spec.outcome_node;
    r.adjustment = spec.adjustment_nodes;
    r.rows = pop.rows.size();
    r.pairs = pop.pairs.size();
    r.drops = pop.drops;
    if (pop.pairs.empty())
        throw Error(Errc::EmptyPopulation,
                    "no matched pairs for the " + std::string(hypothesis_name(pop.hypothesis)) + " hypothesis");
    const auto table = to_observations(pop);
    const auto est = estimate_ate(table, "treatment", "outcome", spec.adjustment_columns);
    r.ate = est.percent();
    r.ate_exact = est.ate_fraction.str();
    r.covered_mass = to_double(est.detail.covered_mass);
    for (const auto& [k, v] : est.detail.arm_mass) r.arm_mass[k] = to_double(v);
    for (const auto& [k, v] : est.detail.probability) r.do_probability[k] = to_double(v);
    r.positivity_violation = est.detail.positivity_violation;
    r.cate = cate(table, "relation", "treatment", "outcome", spec.adjustment_columns);
    return r;
}

namespace {

struct Failure {
    Errc code;
    std::string message;
};

HypothesisResult failed_result(Hypothesis h, const MatchedPopulation* pop, const Error& e) {
    const auto spec = adjustment_for(h);
    HypothesisResult r;
    r.hypothesis = h;
    r.treatment = spec.treatment_node;
    r.outcome = spec.outcome_node;
    r.adjustment = spec.adjustment_nodes;
    if (pop) {
        r.rows = pop->rows.size();
        r.pairs = pop->pairs.size();
        r.drops = pop->drops;
    }
    r.error_code = std::string(errc_name(e.code()));
    r.error = e.what();
    return r;
}

[[noreturn]] void throw_summary(const std::vector<Failure>& failures) {
    std::string msg = std::to_string(failures.size()) + " input failure" + (failures.size() == 1 ? "" : "s") + ":";
    for (const auto& f : failures) msg += "\n  " + f.message;
    throw Error(failures.front().code, msg);
}

std::string model_label(const RunConfig& config, const std::optional<PredictionSet>& file_predictions) {
    if (file_predictions) return file_predictions->source_id().empty() ? config.predictions : file_predictions->source_id();
    return config.baseline;
}

} // namespace

EffectReport run_estimate(const RunConfig& config) {
    config.validate();
    verify_adjustment_sets();
    return run_estimate(config, load_inputs(config));
}

EffectReport run_estimate(const RunConfig& config, const Inputs& inputs) {
    verify_adjustment_sets();
    std::optional<PredictionSet> file_predictions;
    std::vector<Failure> failures;
    if (!config.predictions.empty()) file_predictions = load_predictions(config.predictions, inputs.kb);

    EffectReport report;
    report.model = model_label(config, file_predictions);
    for (auto h : kAllHypotheses) {
        std::optional<MatchedPopulation> pop;
        try {
            pop = population_for(h, inputs, config);
            const auto predictions = file_predictions ? *file_predictions : baseline_for(h, *pop, inputs, config);
            score_population(*pop, predictions);
            auto r = estimate_population(*pop);
            r.source_id = predictions.source_id();
            report.results.push_back(std::move(r));
        } catch (const Error& e) {
            if (!is_estimation_error(e.code()))
                failures.push_back({e.code(), std::string(hypothesis_name(h)) + ": " + e.what()});
            report.results.push_back(failed_result(h, pop ? &*pop : nullptr, e));
        }
    }
    if (!failures.empty()) throw_summary(failures);
    return report;
}

std::vector<fs::path> list_checkpoints(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Errc::IoFailure, "'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.empty() || name.front() == '.') continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return text::natural_less(a.filename().string(), b.filename().string());
    });
    if (files.empty()) throw Error(Errc::IoFailure, "no checkpoint files in '" + dir.string() + "'");
    return files;
}

std::optional<double> kb_accuracy(const KnowledgeBase& kb, const PredictionSet& predictions) {
    std::set<ClozeKey> keys;
    for (const auto& t : kb.triplets())
        for (const auto* p : kb.patterns_for(t.relation, false)) keys.insert({t.subject, t.relation, p->pattern.text()});
    std::size_t covered = 0;
    std::size_t correct = 0;
    for (const auto& key : keys) {
        const auto* rec = predictions.find(key);
        if (!rec) continue;
        ++covered;
        if (!rec->predicted_object) continue;
        const auto gold = kb.objects_for(key.subject, key.relation);
        if (std::binary_search(gold.begin(), gold.end(), std::string(text::trim(*rec->predicted_object)))) ++correct;
    }
    if (covered == 0) return std::nullopt;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(covered);
}

EffectReport run_dynamics(const RunConfig& config, const std::vector<fs::path>& checkpoints) {
    config.validate();
    verify_adjustment_sets();
    return run_dynamics(config, load_inputs(config), checkpoints);
}

EffectReport run_dynamics(const RunConfig& config, const Inputs& inputs, const std::vector<fs::path>& checkpoints) {
    verify_adjustment_sets();
    if (checkpoints.empty()) throw Error(Errc::InvalidConfig, "no checkpoints given");
    std::vector<std::optional<MatchedPopulation>> pops;
    std::vector<std::string> build_errors;
    for (auto h : kAllHypotheses) {
        try {
            pops.push_back(population_for(h, inputs, config));
        } catch (const Error& e) {
            if (!is_estimation_error(e.code())) throw;
            pops.emplace_back();
            build_errors.push_back(std::string(hypothesis_name(h)) + ": " + e.what());
        }
    }

    std::vector<SeriesEntry> series(checkpoints.size());
    auto score_one = [&](std::size_t i) {
        SeriesEntry& s = series[i];
        s.index = i;
        s.label = checkpoints[i].filename().string();
        std::vector<std::string> errors = build_errors;
        try {
            const auto predictions = load_predictions(checkpoints[i], inputs.kb);
            s.accuracy = kb_accuracy(inputs.kb, predictions);
            for (std::size_t k = 0; k < kAllHypotheses.size(); ++k) {
                const auto name = std::string(hypothesis_name(kAllHypotheses[k]));
                s.ate[name] = std::nullopt;
                if (!pops[k]) continue;
                try {
                    auto pop = *pops[k];
                    score_population(pop, predictions);
                    s.ate[name] = estimate_population(pop).ate;
                } catch (const Error& e) {
                    errors.push_back(name + ": " + e.what());
                }
            }
        } catch (const Error& e) {
            for (auto h : kAllHypotheses) s.ate[std::string(hypothesis_name(h))] = std::nullopt;
            errors.push_back(e.what());
        }
        for (const auto& e : errors) s.error += (s.error.empty() ? "" : "; ") + e;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(checkpoints.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < checkpoints.size(); ++i) score_one(i);
    } else {
        std::vector<std::future<void>> jobs;
        for (unsigned w = 0; w < workers; ++w)
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < checkpoints.size(); i += workers) score_one(i);
            }));
        for (auto& j : jobs) j.get();
    }

    EffectReport report;
    report.model = "checkpoints";
    report.series = std::move(series);
    return report;
}

} // namespace factcause
