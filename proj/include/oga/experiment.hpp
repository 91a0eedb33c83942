#pragma once

#include <string>
#include <vector>

#include "oga/io.hpp"
#include "oga/metrics.hpp"
#include "oga/stream.hpp"

namespace oga {

enum class ReportFormat { Csv, Json, Markdown };

ReportFormat parse_report_format(const std::string& name);

struct ExperimentConfig {
    // Either a synthetic generator spec or on-disk embedding paths.
    bool synthetic = true;
    SyntheticSpec synth;
    std::string embeddings_path;
    FileFormat embeddings_format = FileFormat::Binary;
    std::string classifier_path;
    double temperature = 0.01;
    std::string dataset_name = "synthetic";

    std::vector<Method> methods{Method::ZeroShot, Method::OGA};
    int n_runs = 100;
    std::uint64_t base_seed = 0;
    std::vector<int> batch_sizes{32};
    std::vector<int> cache_sizes{8};
    std::vector<double> nu_values{0.05};
    TipAdapterConfig tip;
    EstimatorPolicy estimator_policy = EstimatorPolicy::Auto4d;
    int checkpoint_every = 0;
    bool update_before_predict = true;

    std::string output_path;
    ReportFormat output_format = ReportFormat::Json;
};

// Key-value text format: one "key = value" per line, '#' comments.
ExperimentConfig parse_experiment_config(const std::string& path);

struct CellResult {
    Method method;
    int batch_size;
    int cache_size;
    double nu;
    EstimatorPolicy policy;
    MetricsReport metrics;
    // Per-run checkpoint traces, kept only when checkpointing is enabled.
    std::vector<std::vector<Checkpoint>> checkpoint_traces;
};

struct WinRateEntry {
    Method method_a;
    Method method_b;
    int batch_size;
    int cache_size;
    double nu;
    double rate;  // fraction of runs where a strictly beats b
};

struct ExperimentReport {
    std::string dataset_name;
    int n_runs = 0;
    std::uint64_t base_seed = 0;
    std::vector<CellResult> cells;
    std::vector<WinRateEntry> win_rates;
};

// Runs methods x batch_sizes x cache_sizes x nu_values with the same seed
// list (base_seed .. base_seed + n_runs - 1) in every cell.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);
std::string report_to_csv(const ExperimentReport& report);
std::string report_to_markdown(const ExperimentReport& report);

// Writes via temp-file-then-rename.
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::string& path);

// Long-format CSV (nu, run, samples_seen, accuracy) from checkpointed cells.
std::string trace_plot_csv(const ExperimentReport& report);
void emit_trace_plot_data(const ExperimentReport& report, const std::string& path);

}  // namespace oga
