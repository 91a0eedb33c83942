#include "oga/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "oga/errors.hpp"

namespace oga {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("expected boolean, got: " + v);
}

EstimatorPolicy parse_policy(const std::string& v) {
    if (v == "auto4d") return EstimatorPolicy::Auto4d;
    if (v == "ridge") return EstimatorPolicy::RidgeOnly;
    if (v == "inverse") return EstimatorPolicy::InverseOnly;
    throw ConfigError("unknown estimator policy: " + v);
}

std::string policy_name(EstimatorPolicy p) {
    switch (p) {
        case EstimatorPolicy::Auto4d: return "auto4d";
        case EstimatorPolicy::RidgeOnly: return "ridge";
        case EstimatorPolicy::InverseOnly: return "inverse";
    }
    return "?";
}

// Fixed formatting for report numbers so identical doubles always produce
// identical bytes.
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc | std::ios::binary);
        if (!os) throw IoError("cannot write " + tmp);
        os << content;
        if (!os) throw IoError("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw IoError("cannot rename " + tmp + " to " + path);
    }
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    throw ConfigError("unknown report format: " + name);
}

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path);
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "dataset") {
                if (value == "synthetic") cfg.synthetic = true;
                else if (value == "files") cfg.synthetic = false;
                else throw ConfigError("dataset must be 'synthetic' or 'files'");
            } else if (key == "dataset_name") {
                cfg.dataset_name = value;
            } else if (key == "embeddings") {
                cfg.embeddings_path = value;
            } else if (key == "embeddings_format") {
                if (value == "binary") cfg.embeddings_format = FileFormat::Binary;
                else if (value == "csv") cfg.embeddings_format = FileFormat::Csv;
                else throw ConfigError("embeddings_format must be binary or csv");
            } else if (key == "classifier") {
                cfg.classifier_path = value;
            } else if (key == "temperature") {
                cfg.temperature = std::stod(value);
            } else if (key == "synthetic_seed") {
                cfg.synth.seed = std::stoull(value);
            } else if (key == "synthetic_k") {
                cfg.synth.k = std::stoi(value);
            } else if (key == "synthetic_d") {
                cfg.synth.d = std::stoi(value);
            } else if (key == "synthetic_per_class") {
                cfg.synth.per_class = std::stoi(value);
            } else if (key == "synthetic_dispersion") {
                cfg.synth.dispersion = std::stod(value);
            } else if (key == "synthetic_text_noise") {
                cfg.synth.text_noise = std::stod(value);
            } else if (key == "methods") {
                cfg.methods.clear();
                for (const auto& m : split(value, ',')) {
                    cfg.methods.push_back(parse_method(m));
                }
            } else if (key == "n_runs") {
                cfg.n_runs = std::stoi(value);
            } else if (key == "base_seed") {
                cfg.base_seed = std::stoull(value);
            } else if (key == "batch_sizes") {
                cfg.batch_sizes.clear();
                for (const auto& v : split(value, ',')) {
                    cfg.batch_sizes.push_back(std::stoi(v));
                }
            } else if (key == "cache_sizes") {
                cfg.cache_sizes.clear();
                for (const auto& v : split(value, ',')) {
                    cfg.cache_sizes.push_back(std::stoi(v));
                }
            } else if (key == "nu_values") {
                cfg.nu_values.clear();
                for (const auto& v : split(value, ',')) {
                    cfg.nu_values.push_back(std::stod(v));
                }
            } else if (key == "tip_alpha") {
                cfg.tip.alpha = std::stod(value);
            } else if (key == "tip_beta") {
                cfg.tip.beta = std::stod(value);
            } else if (key == "estimator_policy") {
                cfg.estimator_policy = parse_policy(value);
            } else if (key == "checkpoint_every") {
                cfg.checkpoint_every = std::stoi(value);
            } else if (key == "update_before_predict") {
                cfg.update_before_predict = parse_bool(value);
            } else if (key == "output") {
                cfg.output_path = value;
            } else if (key == "format") {
                cfg.output_format = parse_report_format(value);
            } else {
                throw ConfigError("unknown key: " + key);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(line_no) + " (" + key +
                              "): " + e.what());
        }
    }
    if (cfg.n_runs < 1) throw ConfigError("n_runs must be at least 1");
    if (cfg.methods.empty()) throw ConfigError("methods list is empty");
    if (!cfg.synthetic &&
        (cfg.embeddings_path.empty() || cfg.classifier_path.empty())) {
        throw ConfigError("dataset = files requires embeddings and classifier paths");
    }
    return cfg;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    EmbeddingSet set;
    TextClassifier classifier;
    if (cfg.synthetic) {
        SyntheticSpec spec = cfg.synth;
        spec.temperature = cfg.temperature;
        std::tie(set, classifier) = generate_synthetic(spec);
    } else {
        set = load_embedding_set(cfg.embeddings_path, cfg.embeddings_format);
        classifier = load_text_classifier(cfg.classifier_path, cfg.temperature);
    }

    std::vector<std::uint64_t> seeds(cfg.n_runs);
    for (int i = 0; i < cfg.n_runs; ++i) seeds[i] = cfg.base_seed + i;

    ExperimentReport report;
    report.dataset_name = cfg.dataset_name;
    report.n_runs = cfg.n_runs;
    report.base_seed = cfg.base_seed;

    // per_run accuracies per (method, bs, cs, nu), for win rates
    std::map<std::tuple<int, int, int, int>, std::vector<double>> cell_runs;

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        for (std::size_t bi = 0; bi < cfg.batch_sizes.size(); ++bi) {
            for (std::size_t ci = 0; ci < cfg.cache_sizes.size(); ++ci) {
                for (std::size_t ni = 0; ni < cfg.nu_values.size(); ++ni) {
                    StreamConfig scfg;
                    scfg.method = cfg.methods[mi];
                    scfg.batch_size = cfg.batch_sizes[bi];
                    scfg.cache.shots_per_class = cfg.cache_sizes[ci];
                    scfg.oga.nu = cfg.nu_values[ni];
                    scfg.tip = cfg.tip;
                    scfg.estimator_policy = cfg.estimator_policy;
                    scfg.checkpoint_every = cfg.checkpoint_every;
                    scfg.update_before_predict = cfg.update_before_predict;

                    const std::vector<RunTrace> traces =
                        run_many(set, classifier, scfg, seeds);

                    CellResult cell;
                    cell.method = cfg.methods[mi];
                    cell.batch_size = scfg.batch_size;
                    cell.cache_size = scfg.cache.shots_per_class;
                    cell.nu = scfg.oga.nu;
                    cell.policy = cfg.estimator_policy;
                    cell.metrics = summarize(traces);
                    if (cfg.checkpoint_every > 0) {
                        for (const auto& t : traces) {
                            cell.checkpoint_traces.push_back(t.checkpoints);
                        }
                    }
                    cell_runs[{static_cast<int>(mi), static_cast<int>(bi),
                               static_cast<int>(ci), static_cast<int>(ni)}] =
                        cell.metrics.per_run;
                    report.cells.push_back(std::move(cell));
                }
            }
        }
    }

    for (std::size_t a = 0; a < cfg.methods.size(); ++a) {
        for (std::size_t b = a + 1; b < cfg.methods.size(); ++b) {
            for (std::size_t bi = 0; bi < cfg.batch_sizes.size(); ++bi) {
                for (std::size_t ci = 0; ci < cfg.cache_sizes.size(); ++ci) {
                    for (std::size_t ni = 0; ni < cfg.nu_values.size(); ++ni) {
                        const auto& runs_a = cell_runs.at(
                            {static_cast<int>(a), static_cast<int>(bi),
                             static_cast<int>(ci), static_cast<int>(ni)});
                        const auto& runs_b = cell_runs.at(
                            {static_cast<int>(b), static_cast<int>(bi),
                             static_cast<int>(ci), static_cast<int>(ni)});
                        report.win_rates.push_back(
                            {cfg.methods[a], cfg.methods[b],
                             cfg.batch_sizes[bi], cfg.cache_sizes[ci],
                             cfg.nu_values[ni], win_rate(runs_a, runs_b)});
                    }
                }
            }
        }
    }
    return report;
}

std::string report_to_json(const ExperimentReport& report) {
    json j;
    j["dataset"] = report.dataset_name;
    j["n_runs"] = report.n_runs;
    j["base_seed"] = report.base_seed;
    json cells = json::array();
    for (const auto& cell : report.cells) {
        json c;
        c["method"] = method_name(cell.method);
        c["batch_size"] = cell.batch_size;
        c["cache_size"] = cell.cache_size;
        c["nu"] = cell.nu;
        c["estimator"] = policy_name(cell.policy);
        c["mean_acc"] = cell.metrics.mean_accuracy;
        c["std_acc"] = cell.metrics.std_accuracy;
        c["std_defined"] = cell.metrics.std_defined;
        c["eta"] = cell.metrics.eta;
        c["n_runs"] = cell.metrics.n_runs;
        c["tail_size"] = cell.metrics.tail_size;
        c["per_run"] = cell.metrics.per_run;
        if (!cell.checkpoint_traces.empty()) {
            json traces = json::array();
            for (const auto& trace : cell.checkpoint_traces) {
                json cps = json::array();
                for (const auto& cp : trace) {
                    cps.push_back({cp.samples_seen, cp.full_testset_accuracy});
                }
                traces.push_back(cps);
            }
            c["checkpoint_traces"] = traces;
        }
        cells.push_back(c);
    }
    j["cells"] = cells;
    json wins = json::array();
    for (const auto& w : report.win_rates) {
        json e;
        e["method_a"] = method_name(w.method_a);
        e["method_b"] = method_name(w.method_b);
        e["batch_size"] = w.batch_size;
        e["cache_size"] = w.cache_size;
        e["nu"] = w.nu;
        e["rate"] = w.rate;
        wins.push_back(e);
    }
    j["win_rates"] = wins;
    return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentReport report;
    report.dataset_name = j.at("dataset").get<std::string>();
    report.n_runs = j.at("n_runs").get<int>();
    report.base_seed = j.at("base_seed").get<std::uint64_t>();
    for (const auto& c : j.at("cells")) {
        CellResult cell;
        cell.method = parse_method(c.at("method").get<std::string>());
        cell.batch_size = c.at("batch_size").get<int>();
        cell.cache_size = c.at("cache_size").get<int>();
        cell.nu = c.at("nu").get<double>();
        cell.policy = parse_policy(c.at("estimator").get<std::string>());
        cell.metrics.mean_accuracy = c.at("mean_acc").get<double>();
        cell.metrics.std_accuracy = c.at("std_acc").get<double>();
        cell.metrics.std_defined = c.at("std_defined").get<bool>();
        cell.metrics.eta = c.at("eta").get<double>();
        cell.metrics.n_runs = c.at("n_runs").get<int>();
        cell.metrics.tail_size = c.at("tail_size").get<int>();
        cell.metrics.per_run = c.at("per_run").get<std::vector<double>>();
        if (c.contains("checkpoint_traces")) {
            for (const auto& trace : c.at("checkpoint_traces")) {
                std::vector<Checkpoint> cps;
                for (const auto& cp : trace) {
                    cps.push_back({cp.at(0).get<int>(), cp.at(1).get<double>()});
                }
                cell.checkpoint_traces.push_back(std::move(cps));
            }
        }
        report.cells.push_back(std::move(cell));
    }
    for (const auto& w : j.at("win_rates")) {
        report.win_rates.push_back(
            {parse_method(w.at("method_a").get<std::string>()),
             parse_method(w.at("method_b").get<std::string>()),
             w.at("batch_size").get<int>(), w.at("cache_size").get<int>(),
             w.at("nu").get<double>(), w.at("rate").get<double>()});
    }
    return report;
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream os;
    os << "dataset,method,batch_size,cache_size,nu,estimator,n_runs,mean_acc,std_acc,eta\n";
    for (const auto& cell : report.cells) {
        os << report.dataset_name << ',' << method_name(cell.method) << ','
           << cell.batch_size << ',' << cell.cache_size << ','
           << fmt_double(cell.nu) << ',' << policy_name(cell.policy) << ','
           << cell.metrics.n_runs << ',' << fmt_double(cell.metrics.mean_accuracy)
           << ',' << fmt_double(cell.metrics.std_accuracy) << ','
           << fmt_double(cell.metrics.eta) << "\n";
    }
    return os.str();
}

std::string report_to_markdown(const ExperimentReport& report) {
    std::ostringstream os;
    os << "# Results: " << report.dataset_name << "\n\n";
    os << report.n_runs << " runs per cell, base seed " << report.base_seed << ".\n";

    // One sub-table per (batch_size, cache_size, nu) combination.
    std::map<std::tuple<int, int, double>, std::vector<const CellResult*>> groups;
    for (const auto& cell : report.cells) {
        groups[{cell.batch_size, cell.cache_size, cell.nu}].push_back(&cell);
    }
    for (const auto& [key, cells] : groups) {
        const auto& [bs, cs, nu] = key;
        os << "\n## batch=" << bs << " cache=" << cs << " nu=" << fmt_double(nu)
           << "\n\n";
        os << "| method | mean acc | std | ETA |\n";
        os << "|---|---|---|---|\n";
        for (const CellResult* cell : cells) {
            os << "| " << method_name(cell->method) << " | "
               << fmt_double(100.0 * cell->metrics.mean_accuracy) << " | "
               << (cell->metrics.std_defined
                       ? fmt_double(100.0 * cell->metrics.std_accuracy)
                       : std::string("n/a"))
               << " | " << fmt_double(100.0 * cell->metrics.eta) << " |\n";
        }
    }
    if (!report.win_rates.empty()) {
        os << "\n## Win rates\n\n";
        os << "| a | b | batch | cache | nu | win rate (a > b) |\n";
        os << "|---|---|---|---|---|---|\n";
        for (const auto& w : report.win_rates) {
            os << "| " << method_name(w.method_a) << " | " << method_name(w.method_b)
               << " | " << w.batch_size << " | " << w.cache_size << " | "
               << fmt_double(w.nu) << " | " << fmt_double(w.rate) << " |\n";
        }
    }
    return os.str();
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::string& path) {
    if (report.cells.empty()) throw ValidationError("empty report");
    switch (format) {
        case ReportFormat::Json: atomic_write(path, report_to_json(report)); break;
        case ReportFormat::Csv: atomic_write(path, report_to_csv(report)); break;
        case ReportFormat::Markdown:
            atomic_write(path, report_to_markdown(report));
            break;
    }
}

std::string trace_plot_csv(const ExperimentReport& report) {
    bool any = false;
    std::ostringstream os;
    os << "method,nu,run,samples_seen,accuracy\n";
    for (const auto& cell : report.cells) {
        for (std::size_t r = 0; r < cell.checkpoint_traces.size(); ++r) {
            for (const auto& cp : cell.checkpoint_traces[r]) {
                any = true;
                os << method_name(cell.method) << ',' << fmt_double(cell.nu) << ','
                   << r << ',' << cp.samples_seen << ','
                   << fmt_double(cp.full_testset_accuracy) << "\n";
            }
        }
    }
    if (!any) {
        throw ConfigError("no checkpoints recorded; enable checkpoint_every");
    }
    return os.str();
}

void emit_trace_plot_data(const ExperimentReport& report, const std::string& path) {
    atomic_write(path, trace_plot_csv(report));
}

}  // namespace oga
