#include "oga/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "oga/errors.hpp"
#include "oga/rng.hpp"

namespace oga {

namespace {

constexpr std::uint16_t kFormatVersion = 1;
constexpr char kEmbeddingMagic[4] = {'O', 'G', 'A', 'E'};
constexpr char kClassifierMagic[4] = {'O', 'G', 'A', 'T'};

// Rows already unit-norm within 1e-5 are kept bit-identical so binary
// round-trips are exact; anything else is rescaled. Zero-norm rows are
// degenerate input.
void normalize_rows(Matrix& m, const char* what) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double norm = m.row(i).norm();
        if (norm < 1e-12) {
            throw ValidationError(std::string(what) + ": zero-norm row " +
                                  std::to_string(i));
        }
        if (std::abs(norm - 1.0) > 1e-5) {
            m.row(i) /= norm;
        }
    }
}

void write_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

std::uint16_t read_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    if (!is) throw FormatError("unexpected end of file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError("unexpected end of file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

float read_f32(std::istream& is) {
    const std::uint32_t bits = read_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void expect_magic(std::istream& is, const char (&magic)[4], const char* what) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0) {
        throw FormatError(std::string("bad magic for ") + what);
    }
}

void validate_labels(const EmbeddingSet& set) {
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        if (set.labels[i] < 0 || set.labels[i] >= set.k) {
            throw ValidationError("label " + std::to_string(set.labels[i]) +
                                  " out of range [0," + std::to_string(set.k) +
                                  ") at row " + std::to_string(i));
        }
    }
}

EmbeddingSet load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    expect_magic(is, kEmbeddingMagic, "embedding set");
    const std::uint16_t version = read_u16(is);
    if (version != kFormatVersion) {
        throw FormatError("unsupported embedding file version " +
                          std::to_string(version));
    }
    const std::uint32_t n = read_u32(is);
    const std::uint32_t d = read_u32(is);
    const std::uint32_t k = read_u32(is);
    if (n < 1 || d < 2 || k < 2) {
        throw FormatError("invalid header dimensions");
    }
    EmbeddingSet set;
    set.n = static_cast<int>(n);
    set.d = static_cast<int>(d);
    set.k = static_cast<int>(k);
    set.features.resize(set.n, set.d);
    for (int i = 0; i < set.n; ++i) {
        for (int j = 0; j < set.d; ++j) {
            set.features(i, j) = static_cast<double>(read_f32(is));
        }
    }
    set.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        set.labels[i] = static_cast<int>(read_u32(is));
    }
    return set;
}

EmbeddingSet load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::string header;
    if (!std::getline(is, header)) throw FormatError("empty CSV file");
    int d = 0, k = 0;
    if (std::sscanf(header.c_str(), "d=%d,K=%d", &d, &k) != 2 || d < 2 || k < 2) {
        throw FormatError("malformed CSV header: " + header);
    }
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ',')) throw FormatError("short CSV row");
        labels.push_back(std::stoi(cell));
        std::vector<double> row;
        row.reserve(d);
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != d) {
            throw FormatError("CSV row has " + std::to_string(row.size()) +
                              " values, expected " + std::to_string(d));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("CSV file has no data rows");
    EmbeddingSet set;
    set.d = d;
    set.k = k;
    set.n = static_cast<int>(rows.size());
    set.features.resize(set.n, d);
    for (int i = 0; i < set.n; ++i) {
        for (int j = 0; j < d; ++j) set.features(i, j) = rows[i][j];
    }
    set.labels = std::move(labels);
    return set;
}

}  // namespace

EmbeddingSet load_embedding_set(const std::string& path, FileFormat format) {
    EmbeddingSet set =
        format == FileFormat::Binary ? load_binary(path) : load_csv(path);
    validate_labels(set);
    normalize_rows(set.features, "embedding set");
    return set;
}

void save_embedding_set(const EmbeddingSet& set, const std::string& path,
                        FileFormat format) {
    std::ofstream os(path, format == FileFormat::Binary
                               ? std::ios::binary | std::ios::trunc
                               : std::ios::trunc);
    if (!os) throw IoError("cannot write " + path);
    if (format == FileFormat::Binary) {
        os.write(kEmbeddingMagic, 4);
        write_u16(os, kFormatVersion);
        write_u32(os, static_cast<std::uint32_t>(set.n));
        write_u32(os, static_cast<std::uint32_t>(set.d));
        write_u32(os, static_cast<std::uint32_t>(set.k));
        for (int i = 0; i < set.n; ++i) {
            for (int j = 0; j < set.d; ++j) {
                write_f32(os, static_cast<float>(set.features(i, j)));
            }
        }
        for (int label : set.labels) {
            write_u32(os, static_cast<std::uint32_t>(label));
        }
    } else {
        os << "d=" << set.d << ",K=" << set.k << "\n";
        os.precision(17);
        for (int i = 0; i < set.n; ++i) {
            os << set.labels[i];
            for (int j = 0; j < set.d; ++j) os << ',' << set.features(i, j);
            os << "\n";
        }
    }
    if (!os) throw IoError("write failed for " + path);
}

TextClassifier load_text_classifier(const std::string& path, double temperature) {
    if (temperature <= 0.0) {
        throw ValidationError("temperature must be positive");
    }
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    expect_magic(is, kClassifierMagic, "text classifier");
    const std::uint16_t version = read_u16(is);
    if (version != kFormatVersion) {
        throw FormatError("unsupported classifier file version " +
                          std::to_string(version));
    }
    const std::uint32_t k = read_u32(is);
    const std::uint32_t d = read_u32(is);
    if (k < 2 || d < 2) throw FormatError("invalid classifier header");
    TextClassifier clf;
    clf.k = static_cast<int>(k);
    clf.d = static_cast<int>(d);
    clf.temperature = temperature;
    clf.class_embeddings.resize(clf.k, clf.d);
    for (int i = 0; i < clf.k; ++i) {
        for (int j = 0; j < clf.d; ++j) {
            clf.class_embeddings(i, j) = static_cast<double>(read_f32(is));
        }
    }
    // Trailing data means the declared dimensions disagree with the payload.
    char extra;
    if (is.read(&extra, 1)) {
        throw FormatError("classifier payload larger than declared K x d");
    }
    normalize_rows(clf.class_embeddings, "text classifier");
    return clf;
}

void save_text_classifier(const TextClassifier& clf, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path);
    os.write(kClassifierMagic, 4);
    write_u16(os, kFormatVersion);
    write_u32(os, static_cast<std::uint32_t>(clf.k));
    write_u32(os, static_cast<std::uint32_t>(clf.d));
    for (int i = 0; i < clf.k; ++i) {
        for (int j = 0; j < clf.d; ++j) {
            write_f32(os, static_cast<float>(clf.class_embeddings(i, j)));
        }
    }
    if (!os) throw IoError("write failed for " + path);
}

namespace {

// Round through float32 so in-memory sets match their on-disk encoding and
// binary round-trips are bit-exact.
Vector to_unit_f32(Vector v) {
    const double norm = v.norm();
    if (norm < 1e-12) {
        throw NumericsError("degenerate zero-norm sample in synthesis");
    }
    v /= norm;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = static_cast<double>(static_cast<float>(v[i]));
    }
    return v;
}

}  // namespace

std::pair<EmbeddingSet, TextClassifier> generate_synthetic(const SyntheticSpec& spec) {
    if (spec.k < 2 || spec.d < 2 || spec.per_class < 1) {
        throw ValidationError("synthetic spec requires K >= 2, d >= 2, per_class >= 1");
    }
    if (spec.dispersion < 0.0 || spec.text_noise < 0.0 || spec.temperature <= 0.0) {
        throw ValidationError("synthetic spec requires non-negative noise and positive temperature");
    }
    Rng rng(spec.seed);

    Matrix means(spec.k, spec.d);
    for (int c = 0; c < spec.k; ++c) {
        Vector m(spec.d);
        for (int j = 0; j < spec.d; ++j) m[j] = rng.normal();
        means.row(c) = to_unit_f32(m).transpose();
    }

    EmbeddingSet set;
    set.k = spec.k;
    set.d = spec.d;
    set.n = spec.k * spec.per_class;
    set.features.resize(set.n, spec.d);
    set.labels.resize(set.n);
    int row = 0;
    for (int c = 0; c < spec.k; ++c) {
        for (int s = 0; s < spec.per_class; ++s, ++row) {
            Vector f = means.row(c).transpose();
            for (int j = 0; j < spec.d; ++j) f[j] += spec.dispersion * rng.normal();
            set.features.row(row) = to_unit_f32(f).transpose();
            set.labels[row] = c;
        }
    }

    TextClassifier clf;
    clf.k = spec.k;
    clf.d = spec.d;
    clf.temperature = spec.temperature;
    clf.class_embeddings.resize(spec.k, spec.d);
    for (int c = 0; c < spec.k; ++c) {
        Vector t = means.row(c).transpose();
        for (int j = 0; j < spec.d; ++j) t[j] += spec.text_noise * rng.normal();
        clf.class_embeddings.row(c) = to_unit_f32(t).transpose();
    }
    return {std::move(set), std::move(clf)};
}

}  // namespace oga
