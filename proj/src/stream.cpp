#include "oga/stream.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "oga/errors.hpp"
#include "oga/rng.hpp"
#include "oga/zeroshot.hpp"

namespace oga {

namespace {

using nlohmann::json;

const char kBase64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string pack_bits_base64(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
        out.push_back(kBase64Chars[(chunk >> 18) & 0x3f]);
        out.push_back(kBase64Chars[(chunk >> 12) & 0x3f]);
        out.push_back(i + 1 < bytes.size() ? kBase64Chars[(chunk >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < bytes.size() ? kBase64Chars[chunk & 0x3f] : '=');
    }
    return out;
}

std::vector<std::uint8_t> unpack_bits_base64(const std::string& text, std::size_t n_bits) {
    auto decode_char = [](char c) -> int {
        const char* p = std::strchr(kBase64Chars, c);
        return p && c != '\0' ? static_cast<int>(p - kBase64Chars) : -1;
    };
    std::vector<std::uint8_t> bytes;
    bytes.reserve(text.size() / 4 * 3);
    std::uint32_t chunk = 0;
    int have = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = decode_char(c);
        if (v < 0) throw FormatError("invalid base64 character");
        chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
        if (++have == 4) {
            bytes.push_back(static_cast<std::uint8_t>((chunk >> 16) & 0xff));
            bytes.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xff));
            bytes.push_back(static_cast<std::uint8_t>(chunk & 0xff));
            have = 0;
            chunk = 0;
        }
    }
    if (have == 2) {
        bytes.push_back(static_cast<std::uint8_t>((chunk >> 4) & 0xff));
    } else if (have == 3) {
        bytes.push_back(static_cast<std::uint8_t>((chunk >> 10) & 0xff));
        bytes.push_back(static_cast<std::uint8_t>((chunk >> 2) & 0xff));
    }
    std::vector<std::uint8_t> bits(n_bits, 0);
    for (std::size_t i = 0; i < n_bits; ++i) {
        if (i / 8 >= bytes.size()) throw FormatError("bitset shorter than declared");
        bits[i] = (bytes[i / 8] >> (i % 8)) & 1u;
    }
    return bits;
}

// Predicts a batch with the configured method. The Gaussian model / cache
// snapshot are the post-update state when update_before_predict is set.
Eigen::VectorXi predict_batch(const Matrix& batch, const ZeroShotOutput& zs,
                              const StreamConfig& cfg, const GaussianModel& model,
                              const CacheSnapshot& snapshot, double temperature) {
    switch (cfg.method) {
        case Method::ZeroShot:
            return zs.pseudo_label;
        case Method::OGA:
            return oga_predict(batch, zs, model, cfg.oga).predicted;
        case Method::TipAdapter:
            return tip_adapter_predict(batch, zs, snapshot, cfg.tip, temperature)
                .predicted;
    }
    throw ConfigError("unknown method");
}

double full_testset_accuracy(const EmbeddingSet& set, const TextClassifier& classifier,
                             const StreamConfig& cfg, const GaussianModel& model,
                             const CacheSnapshot& snapshot) {
    const ZeroShotOutput zs = zero_shot_predict(set.features, classifier);
    const Eigen::VectorXi predicted =
        predict_batch(set.features, zs, cfg, model, snapshot, classifier.temperature);
    int correct = 0;
    for (int i = 0; i < set.n; ++i) {
        if (predicted[i] == set.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(set.n);
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::ZeroShot: return "zeroshot";
        case Method::OGA: return "oga";
        case Method::TipAdapter: return "tip";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "zeroshot") return Method::ZeroShot;
    if (name == "oga") return Method::OGA;
    if (name == "tip") return Method::TipAdapter;
    throw ConfigError("unknown method: " + name);
}

std::vector<int> make_stream(const EmbeddingSet& set, std::uint64_t seed) {
    if (set.n < 1) throw ValidationError("empty embedding set");
    std::vector<int> order(set.n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    return order;
}

RunTrace run_stream(const EmbeddingSet& set, const TextClassifier& classifier,
                    const StreamConfig& cfg) {
    if (set.n < 1) throw ValidationError("empty embedding set");
    if (set.d != classifier.d) {
        throw ValidationError("embedding and classifier dimensions differ");
    }
    if (cfg.batch_size < 1) throw ValidationError("batch_size must be at least 1");

    const std::vector<int> order = make_stream(set, cfg.seed);
    const bool uses_cache = cfg.method != Method::ZeroShot;

    EntropyCache cache(set.k, cfg.cache);
    GaussianModel model;
    model.present.assign(set.k, false);
    CacheSnapshot snapshot(set.k);

    RunTrace trace;
    trace.per_sample_correct.reserve(set.n);
    trace.predictions.reserve(set.n);

    Estimator last_estimator = Estimator::IdentityFallback;
    int batches_done = 0;

    for (int start = 0; start < set.n; start += cfg.batch_size) {
        const int b = std::min(cfg.batch_size, set.n - start);
        Matrix batch(b, set.d);
        for (int i = 0; i < b; ++i) {
            batch.row(i) = set.features.row(order[start + i]);
        }
        const ZeroShotOutput zs = zero_shot_predict(batch, classifier);

        auto update = [&] {
            const int mutations = cache.apply_batch(zs, batch);
            trace.cache_mutations += mutations;
            if (mutations > 0) {
                snapshot = cache.snapshot();
                if (cfg.method == Method::OGA) {
                    model = refit(snapshot, cfg.estimator_policy);
                    if (model.estimator_used != last_estimator ||
                        trace.estimator_events.empty()) {
                        trace.estimator_events.push_back(
                            {model.n, model.estimator_used});
                        last_estimator = model.estimator_used;
                    }
                }
            }
        };

        if (uses_cache && cfg.update_before_predict) update();
        const Eigen::VectorXi predicted =
            predict_batch(batch, zs, cfg, model, snapshot, classifier.temperature);
        if (uses_cache && !cfg.update_before_predict) update();

        for (int i = 0; i < b; ++i) {
            // Ground truth is consulted here only, for scoring.
            const bool correct = predicted[i] == set.labels[order[start + i]];
            trace.per_sample_correct.push_back(correct ? 1 : 0);
            trace.predictions.push_back(predicted[i]);
        }

        ++batches_done;
        if (cfg.checkpoint_every > 0 && batches_done % cfg.checkpoint_every == 0) {
            trace.checkpoints.push_back(
                {start + b, full_testset_accuracy(set, classifier, cfg, model, snapshot)});
        }
    }

    long correct = 0;
    for (std::uint8_t bit : trace.per_sample_correct) correct += bit;
    trace.final_accuracy = static_cast<double>(correct) / static_cast<double>(set.n);

    if (!cfg.dump_cache_path.empty()) {
        std::ofstream os(cfg.dump_cache_path, std::ios::trunc);
        if (!os) throw IoError("cannot write " + cfg.dump_cache_path);
        os << cache.dump_csv();
    }
    return trace;
}

std::vector<RunTrace> run_many(const EmbeddingSet& set, const TextClassifier& classifier,
                               const StreamConfig& cfg,
                               const std::vector<std::uint64_t>& seeds) {
    std::vector<RunTrace> traces(seeds.size());

    unsigned workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("OGA_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) workers = static_cast<unsigned>(v);
    }
    workers = std::max(1u, std::min<unsigned>(workers, seeds.size()));

    if (workers == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            StreamConfig run_cfg = cfg;
            run_cfg.seed = seeds[i];
            if (i > 0) run_cfg.dump_cache_path.clear();
            traces[i] = run_stream(set, classifier, run_cfg);
        }
        return traces;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= seeds.size()) return;
                try {
                    StreamConfig run_cfg = cfg;
                    run_cfg.seed = seeds[i];
                    if (i > 0) run_cfg.dump_cache_path.clear();
                    traces[i] = run_stream(set, classifier, run_cfg);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return traces;
}

std::string run_trace_to_json(const RunTrace& trace) {
    json j;
    j["n_samples"] = trace.per_sample_correct.size();
    j["correct_bits"] = pack_bits_base64(trace.per_sample_correct);
    j["predictions"] = trace.predictions;
    j["final_accuracy"] = trace.final_accuracy;
    j["cache_mutations"] = trace.cache_mutations;
    json cps = json::array();
    for (const auto& cp : trace.checkpoints) {
        cps.push_back({cp.samples_seen, cp.full_testset_accuracy});
    }
    j["checkpoints"] = cps;
    json evs = json::array();
    for (const auto& ev : trace.estimator_events) {
        evs.push_back({ev.samples_cached, static_cast<int>(ev.estimator)});
    }
    j["estimator_events"] = evs;
    return j.dump();
}

RunTrace run_trace_from_json(const std::string& text) {
    json j = json::parse(text);
    RunTrace trace;
    const std::size_t n = j.at("n_samples").get<std::size_t>();
    trace.per_sample_correct =
        unpack_bits_base64(j.at("correct_bits").get<std::string>(), n);
    trace.predictions = j.at("predictions").get<std::vector<int>>();
    trace.final_accuracy = j.at("final_accuracy").get<double>();
    trace.cache_mutations = j.at("cache_mutations").get<int>();
    for (const auto& cp : j.at("checkpoints")) {
        trace.checkpoints.push_back({cp.at(0).get<int>(), cp.at(1).get<double>()});
    }
    for (const auto& ev : j.at("estimator_events")) {
        trace.estimator_events.push_back(
            {ev.at(0).get<int>(), static_cast<Estimator>(ev.at(1).get<int>())});
    }
    return trace;
}

}  // namespace oga
