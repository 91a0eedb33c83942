#include "oga/zeroshot.hpp"

#include <cmath>

#include "oga/errors.hpp"

namespace oga {

Matrix compute_logits(const Matrix& batch, const TextClassifier& classifier) {
    if (batch.cols() != classifier.class_embeddings.cols()) {
        throw ValidationError("batch dimension " + std::to_string(batch.cols()) +
                              " does not match classifier dimension " +
                              std::to_string(classifier.class_embeddings.cols()));
    }
    return batch * classifier.class_embeddings.transpose();
}

Vector softmax(const Vector& logits, double temperature) {
    if (temperature <= 0.0) {
        throw ValidationError("temperature must be positive");
    }
    if (!logits.allFinite()) {
        throw NumericsError("non-finite logit in softmax input");
    }
    if (logits.size() == 0) return Vector();
    const Vector scaled = logits / temperature;
    const double m = scaled.maxCoeff();
    Vector out = (scaled.array() - m).exp();
    out /= out.sum();
    return out;
}

double shannon_entropy(const Vector& probs) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (p < 0.0) {
            throw ValidationError("negative probability in entropy input");
        }
        if (p > 0.0) e -= p * std::log(p);
    }
    return e < 0.0 ? 0.0 : e;
}

int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    int best = 0;
    for (int j = 1; j < row.size(); ++j) {
        if (row[j] > row[best]) best = j;
    }
    return best;
}

ZeroShotOutput zero_shot_predict(const Matrix& batch, const TextClassifier& classifier) {
    ZeroShotOutput out;
    out.logits = compute_logits(batch, classifier);
    const Eigen::Index b = out.logits.rows();
    const Eigen::Index k = out.logits.cols();
    out.probs.resize(b, k);
    out.entropy.resize(b);
    out.pseudo_label.resize(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const Vector p = softmax(out.logits.row(i).transpose(), classifier.temperature);
        out.probs.row(i) = p.transpose();
        out.entropy[i] = shannon_entropy(p);
        out.pseudo_label[i] = argmax_row(out.probs.row(i));
    }
    return out;
}

}  // namespace oga
