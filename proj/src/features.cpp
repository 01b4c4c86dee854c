#include "hrlp/features.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hrlp/rng.hpp"

namespace hrlp {

FeatureTable load_features(const std::string& path, const Vocab& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open feature file: " + path);

    std::unordered_map<std::string, std::vector<double>> by_label;
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string label;
        if (!std::getline(fields, label, '\t')) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": missing label");
        }
        std::vector<double> vals;
        std::string tok;
        while (std::getline(fields, tok, '\t')) vals.push_back(std::stod(tok));
        if (vals.empty()) throw FormatError(path + ":" + std::to_string(lineno) + ": no values");
        if (dim == 0) dim = vals.size();
        if (vals.size() != dim) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": inconsistent width " +
                              std::to_string(vals.size()) + " vs " + std::to_string(dim));
        }
        for (double v : vals) {
            if (!std::isfinite(v)) {
                throw FormatError(path + ":" + std::to_string(lineno) + ": non-finite value");
            }
        }
        by_label[label] = std::move(vals);
    }

    FeatureTable t;
    t.dim = dim;
    t.rows.assign(vocab.size() * dim, 0.0);
    std::string missing;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto& label = vocab.label(static_cast<std::int32_t>(i));
        auto it = by_label.find(label);
        if (it == by_label.end()) {
            missing += missing.empty() ? label : (", " + label);
            continue;
        }
        std::copy(it->second.begin(), it->second.end(), t.row(static_cast<EntityId>(i)));
    }
    if (!missing.empty()) throw FormatError("missing features for entities: " + missing);
    return t;
}

FeatureTable synthetic_features(const Vocab& vocab, std::size_t dim, std::uint64_t seed) {
    FeatureTable t;
    t.dim = dim;
    t.rows.assign(vocab.size() * dim, 0.0);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto& label = vocab.label(static_cast<std::int32_t>(i));
        Rng rng(seed ^ fnv1a64(label));
        double* r = t.row(static_cast<EntityId>(i));
        double norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            r[j] = rng.uniform(-1.0, 1.0);
            norm2 += r[j] * r[j];
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t j = 0; j < dim; ++j) r[j] *= inv;
    }
    return t;
}

void write_feature_file(const std::string& path, const FeatureTable& t, const Vocab& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write feature file: " + path);
    out.precision(17);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        out << vocab.label(static_cast<std::int32_t>(i));
        const double* r = t.row(static_cast<EntityId>(i));
        for (std::size_t j = 0; j < t.dim; ++j) out << "\t" << r[j];
        out << "\n";
    }
}

}  // namespace hrlp
