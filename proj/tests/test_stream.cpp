#include <doctest.h>

#include <set>

#include "oga/errors.hpp"
#include "oga/io.hpp"
#include "oga/stream.hpp"

using namespace oga;

namespace {

std::pair<EmbeddingSet, TextClassifier> fixture() {
    return generate_synthetic({.seed = 7, .k = 5, .d = 16, .per_class = 40,
                               .dispersion = 0.3, .text_noise = 0.1});
}

}  // namespace

TEST_CASE("make_stream: determinism and coverage") {
    const auto [set, clf] = fixture();
    const std::vector<int> a = make_stream(set, 99);
    const std::vector<int> b = make_stream(set, 99);
    CHECK(a == b);
    std::set<int> seen(a.begin(), a.end());
    CHECK(seen.size() == static_cast<std::size_t>(set.n));
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == set.n - 1);
}

TEST_CASE("make_stream: different seeds differ") {
    const auto [set, clf] = fixture();
    int differing = 0;
    for (int s = 0; s < 100; ++s) {
        if (make_stream(set, s) != make_stream(set, s + 1000)) ++differing;
    }
    CHECK(differing == 100);
}

TEST_CASE("make_stream: N=1") {
    EmbeddingSet set;
    set.n = 1;
    set.d = 2;
    set.k = 2;
    const std::vector<int> order = make_stream(set, 5);
    REQUIRE(order.size() == 1);
    CHECK(order[0] == 0);
}

TEST_CASE("run_stream: zero-shot accuracy is seed-independent") {
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.method = Method::ZeroShot;
    cfg.seed = 1;
    const double acc1 = run_stream(set, clf, cfg).final_accuracy;
    cfg.seed = 2;
    const double acc2 = run_stream(set, clf, cfg).final_accuracy;
    CHECK(acc1 == acc2);
}

TEST_CASE("run_stream: zero-shot accuracy is batch-size invariant") {
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.method = Method::ZeroShot;
    cfg.seed = 3;
    cfg.batch_size = 32;
    const double acc32 = run_stream(set, clf, cfg).final_accuracy;
    cfg.batch_size = 1;
    const double acc1 = run_stream(set, clf, cfg).final_accuracy;
    cfg.batch_size = 128;
    const double acc128 = run_stream(set, clf, cfg).final_accuracy;
    CHECK(acc32 == acc1);
    CHECK(acc32 == acc128);
}

TEST_CASE("run_stream: OGA with nu=0 equals zero-shot") {
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.seed = 4;
    cfg.method = Method::OGA;
    cfg.oga.nu = 0.0;
    const RunTrace oga = run_stream(set, clf, cfg);
    cfg.method = Method::ZeroShot;
    const RunTrace zs = run_stream(set, clf, cfg);
    CHECK(oga.final_accuracy == zs.final_accuracy);
    CHECK(oga.predictions == zs.predictions);
}

TEST_CASE("run_stream: bit-exact reproducibility") {
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.seed = 12;
    cfg.method = Method::OGA;
    cfg.checkpoint_every = 3;
    const RunTrace a = run_stream(set, clf, cfg);
    const RunTrace b = run_stream(set, clf, cfg);
    CHECK(a.predictions == b.predictions);
    CHECK(a.final_accuracy == b.final_accuracy);
    CHECK(a.cache_mutations == b.cache_mutations);
    REQUIRE(a.checkpoints.size() == b.checkpoints.size());
    for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
        CHECK(a.checkpoints[i].samples_seen == b.checkpoints[i].samples_seen);
        CHECK(a.checkpoints[i].full_testset_accuracy ==
              b.checkpoints[i].full_testset_accuracy);
    }
}

TEST_CASE("run_stream: label scrambling changes accuracy, not predictions") {
    auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.seed = 8;
    cfg.method = Method::OGA;
    const RunTrace clean = run_stream(set, clf, cfg);

    EmbeddingSet poisoned = set;
    for (int i = 0; i < poisoned.n; ++i) {
        poisoned.labels[i] = (poisoned.labels[i] + 1) % poisoned.k;
    }
    const RunTrace dirty = run_stream(poisoned, clf, cfg);
    CHECK(dirty.predictions == clean.predictions);
    CHECK(dirty.final_accuracy != clean.final_accuracy);
}

TEST_CASE("run_stream: empty set rejected") {
    EmbeddingSet set;
    TextClassifier clf;
    CHECK_THROWS_AS(run_stream(set, clf, StreamConfig{}), ValidationError);
}

TEST_CASE("run_many: seed permutation permutes results") {
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.method = Method::OGA;
    const std::vector<RunTrace> fwd = run_many(set, clf, cfg, {1, 2, 3});
    const std::vector<RunTrace> rev = run_many(set, clf, cfg, {3, 2, 1});
    REQUIRE(fwd.size() == 3);
    CHECK(fwd[0].final_accuracy == rev[2].final_accuracy);
    CHECK(fwd[0].predictions == rev[2].predictions);
    CHECK(fwd[2].final_accuracy == rev[0].final_accuracy);
}

TEST_CASE("run_many: zero-shot gives identical accuracies across seeds") {
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.method = Method::ZeroShot;
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < 20; ++i) seeds.push_back(i);
    const std::vector<RunTrace> traces = run_many(set, clf, cfg, seeds);
    for (const auto& t : traces) {
        CHECK(t.final_accuracy == traces.front().final_accuracy);
    }
}

TEST_CASE("run trace JSON round-trip") {
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.seed = 17;
    cfg.method = Method::OGA;
    cfg.checkpoint_every = 2;
    const RunTrace trace = run_stream(set, clf, cfg);
    const RunTrace back = run_trace_from_json(run_trace_to_json(trace));
    CHECK(back.per_sample_correct == trace.per_sample_correct);
    CHECK(back.predictions == trace.predictions);
    CHECK(back.final_accuracy == trace.final_accuracy);
    CHECK(back.cache_mutations == trace.cache_mutations);
    REQUIRE(back.checkpoints.size() == trace.checkpoints.size());
    REQUIRE(back.estimator_events.size() == trace.estimator_events.size());
    for (std::size_t i = 0; i < trace.estimator_events.size(); ++i) {
        CHECK(back.estimator_events[i].samples_cached ==
              trace.estimator_events[i].samples_cached);
        CHECK(back.estimator_events[i].estimator ==
              trace.estimator_events[i].estimator);
    }
}

TEST_CASE("predict-then-update ablation runs and stays deterministic") {
    // Mutation counts agree with the default order because insertion depends
    // only on zero-shot entropy.
    const auto [set, clf] = fixture();
    StreamConfig cfg;
    cfg.seed = 21;
    cfg.method = Method::OGA;
    const RunTrace before = run_stream(set, clf, cfg);
    cfg.update_before_predict = false;
    const RunTrace after = run_stream(set, clf, cfg);
    CHECK(before.cache_mutations == after.cache_mutations);
    CHECK(after.predictions == run_stream(set, clf, cfg).predictions);
}
