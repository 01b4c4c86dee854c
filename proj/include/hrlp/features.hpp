#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrlp/kg.hpp"

namespace hrlp {

// Dense per-entity feature vectors, rows aligned to the vocabulary indices.
struct FeatureTable {
    std::size_t dim{};
    std::vector<double> rows;  // row-major, num_entities x dim

    const double* row(EntityId e) const { return rows.data() + static_cast<std::size_t>(e) * dim; }
    double* row(EntityId e) { return rows.data() + static_cast<std::size_t>(e) * dim; }
    std::size_t num_rows() const { return dim == 0 ? 0 : rows.size() / dim; }
};

// Reads `label<TAB>v1<TAB>...<TAB>vd` lines; every vocabulary entity must
// appear and all rows must share the width of the first line.
FeatureTable load_features(const std::string& path, const Vocab& vocab);

// Deterministic stand-in for externally computed language-model features.
// Rows are unit-norm and keyed on (seed, label hash), so two graphs that
// share a label get the same row regardless of index assignment.
FeatureTable synthetic_features(const Vocab& vocab, std::size_t dim, std::uint64_t seed);

void write_feature_file(const std::string& path, const FeatureTable& t, const Vocab& vocab);

}  // namespace hrlp
