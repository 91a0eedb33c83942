#pragma once

#include <vector>

#include "oga/stream.hpp"

namespace oga {

struct MetricsReport {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    bool std_defined = false;  // false for a single run
    double eta = 0.0;
    int n_runs = 0;
    int tail_size = 0;
    std::vector<double> per_run;  // seed order
};

// Mean of the worst max(1, floor(fraction * N)) accuracies.
double expected_tail_accuracy(const std::vector<double>& accuracies,
                              double fraction = 0.1);

MetricsReport summarize(const std::vector<RunTrace>& traces);

// Fraction of run-aligned pairs where a is strictly better.
double win_rate(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oga
