#include "oga/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "oga/errors.hpp"

namespace oga {

double expected_tail_accuracy(const std::vector<double>& accuracies, double fraction) {
    if (accuracies.empty()) {
        throw ValidationError("expected_tail_accuracy needs at least one run");
    }
    if (fraction <= 0.0 || fraction > 1.0) {
        throw ValidationError("fraction must be in (0, 1]");
    }
    std::vector<double> sorted = accuracies;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t tail = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(fraction * sorted.size())));
    double sum = 0.0;
    for (std::size_t i = 0; i < tail; ++i) sum += sorted[i];
    return sum / static_cast<double>(tail);
}

MetricsReport summarize(const std::vector<RunTrace>& traces) {
    if (traces.empty()) throw ValidationError("summarize needs at least one run");
    MetricsReport report;
    report.n_runs = static_cast<int>(traces.size());
    report.per_run.reserve(traces.size());
    for (const auto& t : traces) report.per_run.push_back(t.final_accuracy);

    double sum = 0.0;
    bool all_equal = true;
    for (double a : report.per_run) {
        sum += a;
        all_equal = all_equal && a == report.per_run.front();
    }
    report.mean_accuracy =
        all_equal ? report.per_run.front() : sum / report.n_runs;

    if (report.n_runs > 1 && !all_equal) {
        double ss = 0.0;
        for (double a : report.per_run) {
            const double dev = a - report.mean_accuracy;
            ss += dev * dev;
        }
        report.std_accuracy = std::sqrt(ss / (report.n_runs - 1));
        report.std_defined = true;
    } else if (report.n_runs > 1) {
        report.std_defined = true;  // exactly zero spread
    }

    report.eta = expected_tail_accuracy(report.per_run);
    report.tail_size = std::max(1, report.n_runs / 10);
    return report;
}

double win_rate(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("win_rate inputs must be run-aligned");
    }
    if (a.empty()) throw ValidationError("win_rate needs at least one run");
    std::size_t wins = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) ++wins;
    }
    return static_cast<double>(wins) / static_cast<double>(a.size());
}

}  // namespace oga
