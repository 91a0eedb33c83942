#pragma once

#include "oga/data.hpp"

namespace oga {

struct ZeroShotOutput {
    Matrix logits;           // B x K cosine similarities
    Matrix probs;            // B x K soft labels
    Vector entropy;          // B, nats
    Eigen::VectorXi pseudo_label;  // B, argmax with lowest-index ties
};

// Cosine logits l_{i,k} = f_i . t_k (rows assumed unit-norm).
Matrix compute_logits(const Matrix& batch, const TextClassifier& classifier);

// Temperature softmax, computed in log-domain with max subtraction.
Vector softmax(const Vector& logits, double temperature);

// -sum y log y with 0 log 0 := 0.
double shannon_entropy(const Vector& probs);

// Lowest index among equal maxima.
int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row);

ZeroShotOutput zero_shot_predict(const Matrix& batch, const TextClassifier& classifier);

}  // namespace oga
