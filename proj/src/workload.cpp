#include "hrlp/workload.hpp"

#include <stdexcept>

namespace hrlp {

namespace {

Statement remap(const Statement& s, const StatementGraph& source, Vocab& entities,
                Vocab& relations) {
    std::vector<QualifierPair> quals;
    quals.reserve(s.qualifiers.size());
    for (const auto& q : s.qualifiers) {
        quals.push_back({relations.intern(source.relations.label(q.relation)),
                         entities.intern(source.entities.label(q.entity))});
    }
    return Statement::make(entities.intern(source.entities.label(s.head)),
                           relations.intern(source.relations.label(s.relation)),
                           entities.intern(source.entities.label(s.tail)), std::move(quals));
}

std::vector<Statement> remap_all(const std::vector<Statement>& in, const StatementGraph& source,
                                 Vocab& entities, Vocab& relations) {
    std::vector<Statement> out;
    out.reserve(in.size());
    for (const auto& s : in) out.push_back(remap(s, source, entities, relations));
    return out;
}

}  // namespace

Workload assemble_workload(const StatementGraph& source, const SplitBundle& bundle) {
    Workload w;
    w.mode = bundle.mode;

    w.train_graph.statements =
        remap_all(bundle.train, source, w.train_graph.entities, w.relations);
    w.train_graph.relations = w.relations;
    rebuild_adjacency(w.train_graph);

    if (bundle.mode == SplitMode::FullyInductive) {
        // Fresh unseen-entity vocabulary: inference statements first, then
        // eval statements extend it with any entity outside the main triples.
        w.eval_graph.statements =
            remap_all(bundle.inference, source, w.eval_graph.entities, w.relations);
        w.valid = remap_all(bundle.valid, source, w.eval_graph.entities, w.relations);
        w.test = remap_all(bundle.test, source, w.eval_graph.entities, w.relations);
        w.eval_graph.relations = w.relations;
        rebuild_adjacency(w.eval_graph);
        for (std::size_t e = 0; e < w.eval_graph.num_entities(); ++e) {
            w.eval_candidates.push_back(static_cast<EntityId>(e));
        }
        w.filter_statements = w.eval_graph.statements;
    } else {
        // Seen graph plus unseen eval entities; candidates stay restricted
        // to the seen vocabulary.
        w.eval_graph.entities = w.train_graph.entities;
        const auto seen_count = w.train_graph.num_entities();
        w.eval_graph.statements = w.train_graph.statements;
        w.valid = remap_all(bundle.valid, source, w.eval_graph.entities, w.relations);
        w.test = remap_all(bundle.test, source, w.eval_graph.entities, w.relations);
        w.eval_graph.relations = w.relations;
        rebuild_adjacency(w.eval_graph);
        for (std::size_t e = 0; e < seen_count; ++e) {
            w.eval_candidates.push_back(static_cast<EntityId>(e));
        }
        w.filter_statements = w.eval_graph.statements;
    }
    for (const auto& s : w.valid) w.filter_statements.push_back(s);
    for (const auto& s : w.test) w.filter_statements.push_back(s);

    // Remapping must not invent relations unseen in train.
    if (w.relations.size() != w.train_graph.relations.size()) {
        throw std::logic_error("eval statements use relations unseen in train");
    }
    return w;
}

}  // namespace hrlp
