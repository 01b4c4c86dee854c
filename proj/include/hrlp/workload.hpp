#pragma once

#include <functional>
#include <vector>

#include "hrlp/features.hpp"
#include "hrlp/kg.hpp"
#include "hrlp/split.hpp"

namespace hrlp {

// A split bundle rewired into the vocabularies the model actually sees:
// a training graph with its own entity vocabulary, and an evaluation-time
// representation graph (SI: the training graph plus unseen eval entities;
// FI: the inference graph plus eval-statement entities). Relations share
// one canonical vocabulary, fixed by first appearance in train.
struct Workload {
    SplitMode mode{};
    Vocab relations;

    StatementGraph train_graph;
    StatementGraph eval_graph;
    std::vector<Statement> valid, test;        // eval-vocab ids
    std::vector<EntityId> eval_candidates;     // SI: seen entities; FI: every unseen entity
    std::vector<Statement> filter_statements;  // all true statements in eval vocab
};

using Featurizer = std::function<FeatureTable(const Vocab&)>;

Workload assemble_workload(const StatementGraph& source, const SplitBundle& bundle);

}  // namespace hrlp
