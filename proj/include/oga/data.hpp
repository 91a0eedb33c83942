#pragma once

#include <Eigen/Dense>
#include <vector>

namespace oga {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// L2-normalized visual features with ground-truth labels.
// Labels are carried for scoring only; the adaptation path never reads them.
struct EmbeddingSet {
    Matrix features;          // N x d, unit-norm rows
    std::vector<int> labels;  // N entries in [0, K)
    int d = 0;
    int n = 0;
    int k = 0;
};

// Per-class text embeddings t_k plus the softmax temperature.
struct TextClassifier {
    Matrix class_embeddings;  // K x d, unit-norm rows
    double temperature = 0.01;
    int k = 0;
    int d = 0;
};

}  // namespace oga
