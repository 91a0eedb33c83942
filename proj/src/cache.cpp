#include "oga/cache.hpp"

#include <cmath>
#include <sstream>

#include "oga/errors.hpp"

namespace oga {

EntropyCache::EntropyCache(int k, const CacheConfig& cfg) : capacity_(cfg.shots_per_class) {
    if (k < 1) throw ValidationError("cache needs at least one class");
    if (cfg.shots_per_class < 1) {
        throw ValidationError("shots_per_class must be at least 1");
    }
    classes_.resize(k);
}

InsertOutcome EntropyCache::try_insert(const Vector& feature, int pseudo_label,
                                       double entropy) {
    if (pseudo_label < 0 || pseudo_label >= class_count()) {
        throw ValidationError("pseudo-label " + std::to_string(pseudo_label) +
                              " out of range");
    }
    if (!std::isfinite(entropy)) {
        throw ValidationError("non-finite entropy");
    }
    auto& entries = classes_[pseudo_label];
    if (static_cast<int>(entries.size()) < capacity_) {
        entries.push_back({feature, entropy, next_seq_++});
        return {InsertKind::Appended, 0.0};
    }
    // Find the worst entry: highest entropy, oldest among equals.
    std::size_t worst = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].entropy > entries[worst].entropy ||
            (entries[i].entropy == entries[worst].entropy &&
             entries[i].seq < entries[worst].seq)) {
            worst = i;
        }
    }
    if (entropy >= entries[worst].entropy) {
        return {InsertKind::Rejected, 0.0};
    }
    const double evicted = entries[worst].entropy;
    entries[worst] = {feature, entropy, next_seq_++};
    return {InsertKind::Replaced, evicted};
}

int EntropyCache::apply_batch(const ZeroShotOutput& batch, const Matrix& features) {
    if (batch.pseudo_label.size() != features.rows()) {
        throw ValidationError("batch outputs and features are not row-aligned");
    }
    int mutations = 0;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const InsertOutcome outcome = try_insert(
            features.row(i).transpose(), batch.pseudo_label[i], batch.entropy[i]);
        if (outcome.kind != InsertKind::Rejected) ++mutations;
    }
    return mutations;
}

CacheSnapshot EntropyCache::snapshot() const {
    CacheSnapshot snap(classes_.size());
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const auto& entries = classes_[c];
        if (entries.empty()) continue;
        const Eigen::Index d = entries.front().feature.size();
        snap[c].resize(static_cast<Eigen::Index>(entries.size()), d);
        for (std::size_t m = 0; m < entries.size(); ++m) {
            snap[c].row(static_cast<Eigen::Index>(m)) = entries[m].feature.transpose();
        }
    }
    return snap;
}

int EntropyCache::total_size() const {
    int n = 0;
    for (const auto& entries : classes_) n += static_cast<int>(entries.size());
    return n;
}

std::string EntropyCache::dump_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "class,entropy,feature\n";
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        for (const auto& e : classes_[c]) {
            os << c << ',' << e.entropy;
            for (Eigen::Index j = 0; j < e.feature.size(); ++j) {
                os << ',' << e.feature[j];
            }
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace oga
