#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hrlp/eval.hpp"
#include "hrlp/rng.hpp"
#include "synth.hpp"

using namespace hrlp;

TEST_CASE("tie handling: optimistic, pessimistic, realistic") {
    // scores: one better, two ties with the target, one worse
    std::vector<double> scores{3.0, 1.5, 1.5, 0.2, 1.5};
    std::vector<char> filter(5, 0);
    auto r = rank(scores, 1, filter);
    CHECK(r.optimistic == 2.0);    // only the 3.0 strictly beats it
    CHECK(r.pessimistic == 4.0);   // three scores >= 1.5, plus... count includes self
    CHECK(r.realistic == 3.0);
    CHECK(r.pool == 5);
}

TEST_CASE("rank rejects a filtered target") {
    std::vector<double> scores{1, 2, 3};
    std::vector<char> filter{0, 1, 0};
    CHECK_THROWS(rank(scores, 1, filter));
}

TEST_CASE("ranks match a sort-based oracle on random vectors with ties") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 5 + static_cast<int>(rng.below(196));
        std::vector<double> scores(static_cast<std::size_t>(n));
        // coarse grid so ties happen often
        for (auto& s : scores) s = std::floor(rng.uniform(-3, 3) * 4) / 4.0;
        std::vector<char> filter(static_cast<std::size_t>(n), 0);
        for (auto& f : filter) f = rng.uniform() < 0.3 ? 1 : 0;
        const int target = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        filter[static_cast<std::size_t>(target)] = 0;

        auto r = rank(scores, target, filter);

        // oracle: count strictly-greater and greater-or-equal among unfiltered
        int greater = 0, geq = 0, pool = 0;
        for (int i = 0; i < n; ++i) {
            if (filter[static_cast<std::size_t>(i)]) continue;
            ++pool;
            if (i == target) continue;
            if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(target)]) ++greater;
            if (scores[static_cast<std::size_t>(i)] >= scores[static_cast<std::size_t>(target)]) ++geq;
        }
        CHECK(r.optimistic == 1 + greater);
        CHECK(r.pessimistic == 1 + geq);
        CHECK(r.realistic == doctest::Approx((2.0 + greater + geq) / 2.0));
        CHECK(r.pool == pool);
    }
}

TEST_CASE("filtering can only improve a rank") {
    Rng rng(5);
    std::vector<double> scores(100);
    for (auto& s : scores) s = rng.uniform(-1, 1);
    std::vector<char> none(100, 0);
    std::vector<char> some(100, 0);
    for (std::size_t i = 0; i < 100; i += 3) some[i] = 1;
    some[40] = 0;
    auto unfiltered = rank(scores, 40, none);
    auto filtered = rank(scores, 40, some);
    CHECK(filtered.realistic <= unfiltered.realistic);
    CHECK(filtered.pool < unfiltered.pool);
}

TEST_CASE("metric arithmetic on a hand-checked rank list") {
    std::vector<RankResult> ranks;
    for (double r : {1.0, 2.0, 4.0}) ranks.push_back({r, r, r, 10});
    auto m = metrics(ranks, {1, 3, 10});
    CHECK(m.mr == doctest::Approx(7.0 / 3.0));
    CHECK(m.mrr == doctest::Approx((1.0 + 0.5 + 0.25) / 3.0));
    CHECK(m.hits[1] == doctest::Approx(1.0 / 3.0));
    CHECK(m.hits[3] == doctest::Approx(2.0 / 3.0));
    CHECK(m.hits[10] == doctest::Approx(1.0));
    CHECK(m.queries == 3);
    // AMR: expected rank under random scoring is (pool + 1) / 2 = 5.5
    CHECK(m.amr == doctest::Approx(100.0 * (7.0 / 3.0) / 5.5));
}

TEST_CASE("amr is 100 percent at chance level and near zero when perfect") {
    std::vector<RankResult> chance{{5.5, 5.5, 5.5, 10}};
    CHECK(metrics(chance, {1}).amr == doctest::Approx(100.0));
    std::vector<RankResult> perfect{{1, 1, 1, 100}};
    CHECK(metrics(perfect, {1}).amr == doctest::Approx(100.0 / 50.5));
    CHECK(metrics(perfect, {1}).hits[1] == doctest::Approx(1.0));
}

TEST_CASE("hits@k is monotone in k") {
    Rng rng(77);
    std::vector<RankResult> ranks;
    for (int i = 0; i < 200; ++i) {
        const double r = 1.0 + static_cast<double>(rng.below(50));
        ranks.push_back({r, r, r, 50});
    }
    auto m = metrics(ranks, {1, 3, 5, 10, 25, 50});
    double prev = 0.0;
    for (int k : {1, 3, 5, 10, 25, 50}) {
        CHECK(m.hits[k] >= prev);
        prev = m.hits[k];
    }
    CHECK(m.hits[50] == doctest::Approx(1.0));
}

TEST_CASE("filter db maps both directions of a main triple") {
    auto g = intern(parse_statement_lines("a,r,b,p,c\na,r,d\n", "inline"));
    ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.d_r = 4;
    cfg.heads = 1;
    ModelParams params = ModelParams::init(cfg, static_cast<int>(g.num_relations()), 1);

    FilterDb db;
    db.add_main_triples(g.statements, params);
    const auto* tails = db.find(params.relation_row(0), *g.entities.find("a"));
    REQUIRE(tails != nullptr);
    CHECK(tails->size() == 2);  // b and d, qualifier-agnostic
    const auto* heads = db.find(params.inverse_row(0), *g.entities.find("b"));
    REQUIRE(heads != nullptr);
    REQUIRE(heads->size() == 1);
    CHECK((*heads)[0] == *g.entities.find("a"));
}

TEST_CASE("evaluate produces two queries per statement and filters known answers") {
    auto g = testutil::random_kg(60, 25, 3, 12);
    auto f = synthetic_features(g.entities, 8, 12);
    ModelConfig cfg;
    cfg.feature_dim = 8;
    cfg.d_r = 8;
    cfg.heads = 2;
    cfg.tf_layers = 1;
    ModelParams params = ModelParams::init(cfg, static_cast<int>(g.num_relations()), 19);

    std::vector<Statement> queries(g.statements.begin(), g.statements.begin() + 10);
    std::vector<EntityId> candidates;
    for (std::size_t e = 0; e < g.num_entities(); ++e) candidates.push_back(static_cast<EntityId>(e));

    FilterDb filter;
    filter.add_main_triples(g.statements, params);

    EvalOptions opts;
    auto out = evaluate(params, g, f, queries, candidates, filter, opts);
    CHECK(out.per_query.size() == 20);
    CHECK(out.combined.queries == 20);
    CHECK(out.tail.queries == 10);
    CHECK(out.head.queries == 10);
    for (const auto& q : out.per_query) {
        CHECK(q.rank.realistic >= 1.0);
        CHECK(q.rank.pool >= 1);
        CHECK(q.rank.pool <= static_cast<int>(candidates.size()));
    }

    // Filtered ranks never degrade relative to raw ranks.
    EvalOptions raw_opts;
    raw_opts.filtered = false;
    auto raw = evaluate(params, g, f, queries, candidates, filter, raw_opts);
    for (std::size_t i = 0; i < raw.per_query.size(); ++i)
        CHECK(out.per_query[i].rank.realistic <= raw.per_query[i].rank.realistic);
}

TEST_CASE("evaluate skips queries whose target is not a candidate") {
    auto g = intern(parse_statement_lines("a,r,b\nb,r,c\n", "inline"));
    auto f = synthetic_features(g.entities, 4, 4);
    ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.d_r = 4;
    cfg.heads = 1;
    cfg.tf_layers = 1;
    ModelParams params = ModelParams::init(cfg, static_cast<int>(g.num_relations()), 2);

    // Candidates exclude c: the tail query of (b, r, c) must be skipped,
    // its head query kept.
    std::vector<EntityId> candidates{*g.entities.find("a"), *g.entities.find("b")};
    FilterDb filter;
    filter.add_main_triples(g.statements, params);
    auto out = evaluate(params, g, f, {g.statements[1]}, candidates, filter, EvalOptions{});
    CHECK(out.per_query.size() == 1);
    CHECK(out.per_query[0].side == Side::Head);
}

TEST_CASE("batch size does not change the metrics") {
    auto g = testutil::random_kg(50, 20, 3, 8);
    auto f = synthetic_features(g.entities, 4, 8);
    ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.d_r = 4;
    cfg.heads = 1;
    cfg.tf_layers = 1;
    ModelParams params = ModelParams::init(cfg, static_cast<int>(g.num_relations()), 6);
    std::vector<Statement> queries(g.statements.begin(), g.statements.begin() + 8);
    std::vector<EntityId> candidates;
    for (std::size_t e = 0; e < g.num_entities(); ++e) candidates.push_back(static_cast<EntityId>(e));
    FilterDb filter;
    filter.add_main_triples(g.statements, params);

    EvalOptions a, b;
    a.batch_size = 3;
    b.batch_size = 64;
    auto ra = evaluate(params, g, f, queries, candidates, filter, a);
    auto rb = evaluate(params, g, f, queries, candidates, filter, b);
    CHECK(ra.combined.mr == rb.combined.mr);
    CHECK(ra.combined.mrr == rb.combined.mrr);
}
