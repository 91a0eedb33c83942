#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "oga/adapters.hpp"
#include "oga/cache.hpp"
#include "oga/data.hpp"
#include "oga/gaussian.hpp"

namespace oga {

enum class Method { ZeroShot, OGA, TipAdapter };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct StreamConfig {
    std::uint64_t seed = 0;
    int batch_size = 32;
    Method method = Method::OGA;
    CacheConfig cache;
    OgaConfig oga;
    TipAdapterConfig tip;
    EstimatorPolicy estimator_policy = EstimatorPolicy::Auto4d;
    // Batches between full-test-set evaluations; 0 disables checkpointing.
    int checkpoint_every = 0;
    // Cache insert -> refit -> predict per batch; flip for the
    // predict-then-update ablation.
    bool update_before_predict = true;
    // When non-empty, the final cache contents are dumped here as CSV.
    std::string dump_cache_path;
};

struct Checkpoint {
    int samples_seen = 0;
    double full_testset_accuracy = 0.0;
};

struct EstimatorEvent {
    int samples_cached = 0;       // cache size when the estimator changed
    Estimator estimator = Estimator::IdentityFallback;
};

struct RunTrace {
    std::vector<std::uint8_t> per_sample_correct;  // stream order
    std::vector<int> predictions;                  // stream order
    double final_accuracy = 0.0;
    std::vector<Checkpoint> checkpoints;
    int cache_mutations = 0;
    std::vector<EstimatorEvent> estimator_events;
};

// Uniform random permutation of [0, N), determined solely by the seed
// (mt19937_64 + rejection-sampled Fisher-Yates; stable across platforms).
std::vector<int> make_stream(const EmbeddingSet& set, std::uint64_t seed);

RunTrace run_stream(const EmbeddingSet& set, const TextClassifier& classifier,
                    const StreamConfig& cfg);

// Independent runs, one per seed; results in seed order. Worker count from
// the OGA_WORKERS environment variable (default: hardware concurrency).
std::vector<RunTrace> run_many(const EmbeddingSet& set, const TextClassifier& classifier,
                               const StreamConfig& cfg,
                               const std::vector<std::uint64_t>& seeds);

std::string run_trace_to_json(const RunTrace& trace);
RunTrace run_trace_from_json(const std::string& text);

}  // namespace oga
