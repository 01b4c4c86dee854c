#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hrlp/analysis.hpp"
#include "hrlp/workload.hpp"
#include "synth.hpp"

using namespace hrlp;

namespace {

ModelConfig small_cfg() {
    ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.d_r = 4;
    cfg.tf_layers = 1;
    cfg.heads = 1;
    cfg.ffn_hidden = 6;
    return cfg;
}

}  // namespace

TEST_CASE("masking strips exactly the targeted qualifier relation") {
    auto g = intern(parse_statement_lines(
        "a,r,b,p,c,q,d\n"
        "b,r,c,p,a\n"
        "c,q,d\n",  // q as main relation must survive
        "inline"));
    const RelationId p = *g.relations.find("p");
    auto masked = mask_qualifier_relation(g, p);

    CHECK(masked.statements.size() == g.statements.size());
    CHECK(masked.entities.size() == g.entities.size());
    for (const auto& s : masked.statements)
        for (const auto& qp : s.qualifiers) CHECK(qp.relation != p);
    // Main triples untouched, including those using other relations.
    for (std::size_t i = 0; i < g.statements.size(); ++i) {
        CHECK(masked.statements[i].head == g.statements[i].head);
        CHECK(masked.statements[i].relation == g.statements[i].relation);
        CHECK(masked.statements[i].tail == g.statements[i].tail);
    }
    // The q qualifier on statement 0 survives.
    const RelationId q = *g.relations.find("q");
    REQUIRE(masked.statements[0].qualifiers.size() == 1);
    CHECK(masked.statements[0].qualifiers[0].relation == q);
    // Adjacency rebuilt consistently.
    std::size_t total = 0;
    for (const auto& v : masked.adjacency) total += v.size();
    CHECK(total == 2 * masked.statements.size());
}

TEST_CASE("masking an absent relation is the identity") {
    auto g = testutil::random_kg(50, 25, 4, 2);
    const RelationId ghost = static_cast<RelationId>(g.num_relations());  // never used
    auto masked = mask_qualifier_relation(g.statements, ghost);
    CHECK(masked == g.statements);
}

TEST_CASE("ranks bucket by qualifier count") {
    EvalOutcome outcome;
    outcome.per_query.push_back({Side::Tail, 0, 0, 0, {1, 1, 1, 5}});
    outcome.per_query.push_back({Side::Head, 0, 0, 0, {3, 3, 3, 5}});
    outcome.per_query.push_back({Side::Tail, 1, 2, 0, {2, 2, 2, 5}});
    auto buckets = ranks_by_qualifier_count(outcome);
    REQUIRE(buckets.count(0) == 1);
    REQUIRE(buckets.count(2) == 1);
    CHECK(buckets[0] == std::vector<double>{1.0, 3.0});
    CHECK(buckets[2] == std::vector<double>{2.0});
}

TEST_CASE("delta_mr is zero for an unused relation and pure") {
    auto g = testutil::random_kg(60, 25, 4, 9);
    auto f = synthetic_features(g.entities, 4, 9);
    ModelParams model = ModelParams::init(small_cfg(), static_cast<int>(g.num_relations()) + 1, 4);

    std::vector<Statement> queries(g.statements.begin(), g.statements.begin() + 10);
    std::vector<EntityId> candidates;
    for (std::size_t e = 0; e < g.num_entities(); ++e) candidates.push_back(static_cast<EntityId>(e));
    FilterDb filter;
    filter.add_main_triples(g.statements, model);

    // An extra vocabulary slot that no statement references.
    StatementGraph g2 = g;
    const RelationId unused = g2.relations.intern("p_unused");

    AnalysisContext ctx;
    ctx.rep_graph = &g2;
    ctx.features = &f;
    ctx.queries = &queries;
    ctx.candidates = &candidates;
    ctx.filter = &filter;

    const auto params_before = model.t("relation_table").value.data;
    const auto stmts_before = g2.statements;
    auto report = delta_mr(model, ctx, unused, MaskScope::Global);
    CHECK(report.delta_mr == 0.0);
    CHECK(report.occurrences == 0);
    CHECK(report.label == "p_unused");
    // Purity: inputs bit-unchanged.
    CHECK(model.t("relation_table").value.data == params_before);
    CHECK(g2.statements == stmts_before);
    CHECK(queries.size() == 10);
}

TEST_CASE("per-statement scope restricts the affected query count") {
    auto g = intern(parse_statement_lines(
        "a,r,b,p,c\n"
        "b,r,c\n"
        "c,r,d,p,a\n"
        "d,r,a\n",
        "inline"));
    auto f = synthetic_features(g.entities, 4, 3);
    ModelParams model = ModelParams::init(small_cfg(), static_cast<int>(g.num_relations()), 8);
    std::vector<Statement> queries = g.statements;
    std::vector<EntityId> candidates;
    for (std::size_t e = 0; e < g.num_entities(); ++e) candidates.push_back(static_cast<EntityId>(e));
    FilterDb filter;
    filter.add_main_triples(g.statements, model);

    AnalysisContext ctx;
    ctx.rep_graph = &g;
    ctx.features = &f;
    ctx.queries = &queries;
    ctx.candidates = &candidates;
    ctx.filter = &filter;

    const RelationId p = *g.relations.find("p");
    auto per_stmt = delta_mr(model, ctx, p, MaskScope::PerStatement);
    // Two of four statements carry p -> at most 4 of 8 queries affected.
    CHECK(per_stmt.affected_queries == 4);
    CHECK(per_stmt.affected_queries <= 2 * queries.size());
    CHECK(per_stmt.scope == MaskScope::PerStatement);

    auto global = delta_mr(model, ctx, p, MaskScope::Global);
    CHECK(global.affected_queries == 8);
    // occurrences counts graph + query qualifier pairs with relation p
    CHECK(global.occurrences == 4);
}
