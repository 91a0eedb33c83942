#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oga/errors.hpp"
#include "oga/experiment.hpp"
#include "oga/io.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& dump_cache,
            const std::string& trace_out) {
    oga::ExperimentConfig cfg = oga::parse_experiment_config(config_path);
    if (!dump_cache.empty()) {
        // Debug dump of the first run's final cache, via a single extra run.
        oga::EmbeddingSet set;
        oga::TextClassifier classifier;
        if (cfg.synthetic) {
            oga::SyntheticSpec spec = cfg.synth;
            spec.temperature = cfg.temperature;
            std::tie(set, classifier) = oga::generate_synthetic(spec);
        } else {
            set = oga::load_embedding_set(cfg.embeddings_path, cfg.embeddings_format);
            classifier = oga::load_text_classifier(cfg.classifier_path, cfg.temperature);
        }
        oga::StreamConfig scfg;
        scfg.seed = cfg.base_seed;
        scfg.method = cfg.methods.front();
        for (oga::Method m : cfg.methods) {
            if (m != oga::Method::ZeroShot) {
                scfg.method = m;  // zero-shot never fills the cache
                break;
            }
        }
        scfg.batch_size = cfg.batch_sizes.front();
        scfg.cache.shots_per_class = cfg.cache_sizes.front();
        scfg.oga.nu = cfg.nu_values.front();
        scfg.tip = cfg.tip;
        scfg.estimator_policy = cfg.estimator_policy;
        scfg.dump_cache_path = dump_cache;
        oga::run_stream(set, classifier, scfg);
        std::cout << "cache dump written to " << dump_cache << "\n";
    }
    const oga::ExperimentReport report = oga::run_experiment(cfg);
    if (!cfg.output_path.empty()) {
        oga::emit_report(report, cfg.output_format, cfg.output_path);
        std::cout << "report written to " << cfg.output_path << "\n";
    } else {
        std::cout << oga::report_to_markdown(report);
    }
    if (!trace_out.empty()) {
        oga::emit_trace_plot_data(report, trace_out);
        std::cout << "trace plot data written to " << trace_out << "\n";
    }
    return 0;
}

int cmd_synth(const oga::SyntheticSpec& spec, const std::string& out_prefix) {
    const auto [set, classifier] = oga::generate_synthetic(spec);
    oga::save_embedding_set(set, out_prefix + ".ogae", oga::FileFormat::Binary);
    oga::save_text_classifier(classifier, out_prefix + ".ogat");
    std::cout << "wrote " << out_prefix << ".ogae (N=" << set.n << ", d=" << set.d
              << ", K=" << set.k << ") and " << out_prefix << ".ogat\n";
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
    std::ifstream is(in_path);
    if (!is) throw oga::IoError("cannot open " + in_path);
    std::stringstream ss;
    ss << is.rdbuf();
    const oga::ExperimentReport report = oga::report_from_json(ss.str());
    const oga::ReportFormat fmt = oga::parse_report_format(format);
    if (out_path.empty()) {
        switch (fmt) {
            case oga::ReportFormat::Json: std::cout << oga::report_to_json(report); break;
            case oga::ReportFormat::Csv: std::cout << oga::report_to_csv(report); break;
            case oga::ReportFormat::Markdown:
                std::cout << oga::report_to_markdown(report);
                break;
        }
    } else {
        oga::emit_report(report, fmt, out_path);
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online Gaussian Adaptation benchmark harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment matrix from a config file");
    std::string config_path;
    std::string dump_cache;
    std::string trace_out;
    run->add_option("--config", config_path, "Key-value config file")->required();
    run->add_option("--dump-cache-csv", dump_cache,
                    "Dump the first run's final cache contents as CSV");
    run->add_option("--trace-csv", trace_out,
                    "Emit checkpoint traces as long-format CSV");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic embedding set");
    oga::SyntheticSpec spec;
    std::string out_prefix = "synthetic";
    synth->add_option("--seed", spec.seed, "RNG seed");
    synth->add_option("--k", spec.k, "Class count")->required();
    synth->add_option("--d", spec.d, "Embedding dimension")->required();
    synth->add_option("--per-class", spec.per_class, "Samples per class")->required();
    synth->add_option("--dispersion", spec.dispersion, "Sample noise std");
    synth->add_option("--text-noise", spec.text_noise, "Text embedding noise std");
    synth->add_option("--out", out_prefix, "Output path prefix");

    auto* report = app.add_subcommand("report", "Re-render a JSON report");
    std::string in_path;
    std::string format = "md";
    std::string out_path;
    report->add_option("--in", in_path, "JSON report file")->required();
    report->add_option("--format", format, "csv, json or md");
    report->add_option("--out", out_path, "Output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, dump_cache, trace_out);
        if (synth->parsed()) return cmd_synth(spec, out_prefix);
        if (report->parsed()) return cmd_report(in_path, format, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
