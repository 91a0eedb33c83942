#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oga/data.hpp"
#include "oga/zeroshot.hpp"

namespace oga {

struct CacheConfig {
    int shots_per_class = 8;
};

enum class InsertKind { Appended, Replaced, Rejected };

struct InsertOutcome {
    InsertKind kind = InsertKind::Rejected;
    double evicted_entropy = 0.0;  // valid only for Replaced
};

// One per-class feature matrix (rows are cached samples, stream order).
using CacheSnapshot = std::vector<Matrix>;

// Per-class bounded store of low-entropy pseudo-labeled features. Eviction
// removes the highest-entropy entry; ties evict the oldest such entry.
class EntropyCache {
public:
    EntropyCache(int k, const CacheConfig& cfg);

    InsertOutcome try_insert(const Vector& feature, int pseudo_label, double entropy);

    // Applies try_insert to each row in stream order; returns the number of
    // Appended + Replaced outcomes.
    int apply_batch(const ZeroShotOutput& batch, const Matrix& features);

    CacheSnapshot snapshot() const;

    int total_size() const;
    int class_count() const { return static_cast<int>(classes_.size()); }
    int capacity() const { return capacity_; }

    // Debug dump: one "class,entropy,v1,...,vd" line per entry.
    std::string dump_csv() const;

private:
    struct Entry {
        Vector feature;
        double entropy;
        std::uint64_t seq;  // insertion order, for eviction tie-breaking
    };

    std::vector<std::vector<Entry>> classes_;
    int capacity_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace oga
