#include "hrlp/analysis.hpp"

#include <algorithm>

namespace hrlp {

namespace {

Statement strip(const Statement& s, RelationId relation) {
    std::vector<QualifierPair> kept;
    kept.reserve(s.qualifiers.size());
    for (const auto& q : s.qualifiers)
        if (q.relation != relation) kept.push_back(q);
    return Statement::make(s.head, s.relation, s.tail, std::move(kept));
}

std::size_t count_occurrences(const std::vector<Statement>& statements, RelationId relation) {
    std::size_t n = 0;
    for (const auto& s : statements)
        for (const auto& q : s.qualifiers)
            if (q.relation == relation) ++n;
    return n;
}

double mean_rank(const std::vector<QueryRank>& ranks, const std::vector<char>* keep) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& qr : ranks) {
        if (keep && !(*keep)[qr.statement_index]) continue;
        sum += qr.rank.realistic;
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

std::vector<Statement> mask_qualifier_relation(const std::vector<Statement>& statements,
                                               RelationId relation) {
    std::vector<Statement> out;
    out.reserve(statements.size());
    for (const auto& s : statements) out.push_back(strip(s, relation));
    return out;
}

StatementGraph mask_qualifier_relation(const StatementGraph& graph, RelationId relation) {
    StatementGraph out;
    out.entities = graph.entities;
    out.relations = graph.relations;
    out.statements = mask_qualifier_relation(graph.statements, relation);
    rebuild_adjacency(out);
    return out;
}

std::map<std::size_t, std::vector<double>> ranks_by_qualifier_count(const EvalOutcome& outcome) {
    std::map<std::size_t, std::vector<double>> buckets;
    for (const auto& qr : outcome.per_query)
        buckets[qr.qualifier_count].push_back(qr.rank.realistic);
    return buckets;
}

MaskReport delta_mr(ModelParams& model, const AnalysisContext& ctx, RelationId relation,
                    MaskScope scope, bool mask_eval_statements) {
    MaskReport report;
    report.relation = relation;
    report.label = ctx.rep_graph->relations.label(relation);
    report.scope = scope;
    report.occurrences = count_occurrences(ctx.rep_graph->statements, relation) +
                         count_occurrences(*ctx.queries, relation);

    const std::vector<char>* keep = nullptr;
    std::vector<char> uses_relation;
    if (scope == MaskScope::PerStatement) {
        uses_relation.resize(ctx.queries->size(), 0);
        for (std::size_t i = 0; i < ctx.queries->size(); ++i)
            for (const auto& q : (*ctx.queries)[i].qualifiers)
                if (q.relation == relation) uses_relation[i] = 1;
        keep = &uses_relation;
    }

    EvalOutcome base = evaluate(model, *ctx.rep_graph, *ctx.features, *ctx.queries,
                                *ctx.candidates, *ctx.filter, ctx.options);
    report.mr_unmasked = mean_rank(base.per_query, keep);

    StatementGraph masked_graph = mask_qualifier_relation(*ctx.rep_graph, relation);
    std::vector<Statement> masked_queries;
    const std::vector<Statement>* queries = ctx.queries;
    if (scope == MaskScope::PerStatement && mask_eval_statements) {
        masked_queries = mask_qualifier_relation(*ctx.queries, relation);
        queries = &masked_queries;
    }
    EvalOutcome masked = evaluate(model, masked_graph, *ctx.features, *queries, *ctx.candidates,
                                  *ctx.filter, ctx.options);
    report.mr_masked = mean_rank(masked.per_query, keep);

    report.delta_mr = report.mr_unmasked - report.mr_masked;
    for (const auto& qr : base.per_query)
        if (!keep || uses_relation[qr.statement_index]) ++report.affected_queries;
    return report;
}

}  // namespace hrlp
