#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "oga/data.hpp"

namespace oga {

enum class FileFormat { Binary, Csv };

// Binary embedding file: magic "OGAE", u16 version (LE), u32 N, u32 d, u32 K,
// N*d float32 LE row-major, N u32 LE labels.
// CSV: header line "d=<d>,K=<K>", then one "label,v1,...,vd" row per sample.
EmbeddingSet load_embedding_set(const std::string& path, FileFormat format);
void save_embedding_set(const EmbeddingSet& set, const std::string& path,
                        FileFormat format);

// Text classifier file: magic "OGAT", u16 version, u32 K, u32 d, K*d float32.
TextClassifier load_text_classifier(const std::string& path, double temperature);
void save_text_classifier(const TextClassifier& clf, const std::string& path);

struct SyntheticSpec {
    std::uint64_t seed = 0;
    int k = 2;
    int d = 2;
    int per_class = 1;
    double dispersion = 0.3;
    double text_noise = 0.1;
    double temperature = 0.01;
};

// Sphere-projected Gaussian clusters: class means uniform on the unit sphere,
// samples = mean + isotropic noise (std dispersion) re-normalized, text
// embeddings = mean + isotropic noise (std text_noise) re-normalized.
// Pure function of its arguments.
std::pair<EmbeddingSet, TextClassifier> generate_synthetic(const SyntheticSpec& spec);

}  // namespace oga
