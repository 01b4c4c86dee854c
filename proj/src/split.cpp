#include "hrlp/split.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hrlp/rng.hpp"

namespace hrlp {

namespace {

using EntitySet = std::unordered_set<EntityId>;
using RelationSet = std::unordered_set<RelationId>;

// Entities occurring as head or tail anywhere ("statement entities").
std::vector<EntityId> statement_entities(const std::vector<Statement>& statements) {
    EntitySet seen;
    std::vector<EntityId> out;
    for (const auto& s : statements) {
        if (seen.insert(s.head).second) out.push_back(s.head);
        if (seen.insert(s.tail).second) out.push_back(s.tail);
    }
    return out;
}

EntitySet entities_any_position(const std::vector<Statement>& statements) {
    EntitySet out;
    for (const auto& s : statements) {
        out.insert(s.head);
        out.insert(s.tail);
        for (const auto& q : s.qualifiers) out.insert(q.entity);
    }
    return out;
}

RelationSet relations_of(const std::vector<Statement>& statements) {
    RelationSet out;
    for (const auto& s : statements) {
        out.insert(s.relation);
        for (const auto& q : s.qualifiers) out.insert(q.relation);
    }
    return out;
}

// Undirected BFS over main edges only; qualifier edges are not traversed.
// Returns hop distance per entity (-1 = unreachable). `allowed` restricts
// the traversal when non-null.
std::vector<int> bfs_hops(const std::vector<Statement>& statements, std::size_t num_entities,
                          const std::vector<EntityId>& seeds, const EntitySet* allowed) {
    std::vector<std::vector<EntityId>> adj(num_entities);
    for (const auto& s : statements) {
        adj[static_cast<std::size_t>(s.head)].push_back(s.tail);
        adj[static_cast<std::size_t>(s.tail)].push_back(s.head);
    }
    std::vector<int> dist(num_entities, -1);
    std::queue<EntityId> q;
    for (EntityId e : seeds) {
        if (allowed && !allowed->count(e)) continue;
        if (dist[static_cast<std::size_t>(e)] == -1) {
            dist[static_cast<std::size_t>(e)] = 0;
            q.push(e);
        }
    }
    while (!q.empty()) {
        const EntityId u = q.front();
        q.pop();
        for (EntityId v : adj[static_cast<std::size_t>(u)]) {
            if (allowed && !allowed->count(v)) continue;
            if (dist[static_cast<std::size_t>(v)] == -1) {
                dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

SplitStats compute_stats(const std::vector<Statement>& statements) {
    SplitStats st;
    st.statements = statements.size();
    st.qualifier_share = qualifier_share(statements);
    st.entities = entities_any_position(statements).size();
    st.relations = relations_of(statements).size();
    return st;
}

std::vector<EntityId> sample_distinct(std::vector<EntityId> pool, std::size_t count, Rng& rng) {
    rng.shuffle(pool);
    if (pool.size() > count) pool.resize(count);
    return pool;
}

void finalize(SplitBundle& b, const StatementGraph& graph) {
    b.seen_entities = entities_any_position(b.train);
    b.train_stats = compute_stats(b.train);
    b.valid_stats = compute_stats(b.valid);
    b.test_stats = compute_stats(b.test);
    b.inference_stats = compute_stats(b.inference);

    if (b.mode == SplitMode::FullyInductive) {
        EntitySet inf_main;
        for (const auto& s : b.inference) {
            inf_main.insert(s.head);
            inf_main.insert(s.tail);
        }
        EntitySet eval_ents = entities_any_position(b.valid);
        for (EntityId e : entities_any_position(b.test)) eval_ents.insert(e);
        b.eval_entities_outside_inference = 0;
        for (EntityId e : eval_ents) {
            if (!inf_main.count(e)) ++b.eval_entities_outside_inference;
        }
    }

    const AuditReport report = audit(b, graph);
    if (!report.pass()) {
        throw std::logic_error("split builder produced an invalid bundle:\n" + report.to_string());
    }
}

}  // namespace

void SamplerConfig::validate() const {
    auto check_sum = [](const std::array<double, 3>& r, const char* what) {
        double sum = 0.0;
        for (double x : r) {
            if (x <= 0.0) throw SplitError(std::string(what) + ": fractions must be positive");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw SplitError(std::string(what) + ": fractions must sum to 1");
        }
    };
    check_sum(fi_ratios, "fi_ratios");
    check_sum(si_fractions, "si_fractions");
    if (n == 0 || m == 0) throw SplitError("entity sample counts n, m must be positive");
}

SplitBundle build_fi_split(const StatementGraph& graph, const SamplerConfig& cfg) {
    cfg.validate();
    if (graph.statements.empty()) throw SplitError("cannot split an empty graph");
    Rng rng(cfg.seed);

    const auto stmt_entities = statement_entities(graph.statements);
    const auto train_seeds = sample_distinct(stmt_entities, cfg.n, rng);

    SplitBundle b;
    b.mode = SplitMode::FullyInductive;

    const auto hops = bfs_hops(graph.statements, graph.num_entities(), train_seeds, nullptr);
    for (const auto& s : graph.statements) {
        const int dh = hops[static_cast<std::size_t>(s.head)];
        const int dt = hops[static_cast<std::size_t>(s.tail)];
        if ((dh >= 0 && dh <= static_cast<int>(cfg.k)) ||
            (dt >= 0 && dt <= static_cast<int>(cfg.k))) {
            b.train.push_back(s);
        }
    }
    const EntitySet seen = entities_any_position(b.train);
    const RelationSet train_rels = relations_of(b.train);

    // Pool: statements whose endpoints avoid every seen entity.
    std::vector<Statement> pool;
    for (const auto& s : graph.statements) {
        if (!seen.count(s.head) && !seen.count(s.tail)) pool.push_back(s);
    }

    std::vector<EntityId> pool_entities;
    for (EntityId e : statement_entities(pool)) {
        if (!seen.count(e)) pool_entities.push_back(e);
    }
    const auto ind_seeds = sample_distinct(pool_entities, cfg.m, rng);

    EntitySet pool_allowed;
    for (EntityId e : statement_entities(pool)) pool_allowed.insert(e);
    const auto pool_hops = bfs_hops(pool, graph.num_entities(), ind_seeds, &pool_allowed);

    std::vector<Statement> inductive;
    for (const auto& s : pool) {
        const int dh = pool_hops[static_cast<std::size_t>(s.head)];
        const int dt = pool_hops[static_cast<std::size_t>(s.tail)];
        if (!((dh >= 0 && dh <= static_cast<int>(cfg.l)) ||
              (dt >= 0 && dt <= static_cast<int>(cfg.l)))) {
            continue;
        }
        // Entity disjointness extends to qualifier positions.
        bool touches_seen = false;
        for (const auto& q : s.qualifiers) {
            if (seen.count(q.entity)) {
                touches_seen = true;
                break;
            }
        }
        if (touches_seen) continue;
        // Relation coverage (main or qualifier).
        bool rels_seen = train_rels.count(s.relation) > 0;
        for (const auto& q : s.qualifiers) {
            if (!rels_seen) break;
            rels_seen = train_rels.count(q.relation) > 0;
        }
        if (rels_seen) inductive.push_back(s);
    }

    if (inductive.empty()) {
        throw SplitError("unsatisfiable FI split: inductive pool empty after filtering");
    }

    rng.shuffle(inductive);
    const auto total = inductive.size();
    const auto c1 = static_cast<std::size_t>(std::llround(cfg.fi_ratios[0] * static_cast<double>(total)));
    const auto c2 = static_cast<std::size_t>(
        std::llround((cfg.fi_ratios[0] + cfg.fi_ratios[1]) * static_cast<double>(total)));
    b.inference.assign(inductive.begin(), inductive.begin() + static_cast<std::ptrdiff_t>(c1));
    b.valid.assign(inductive.begin() + static_cast<std::ptrdiff_t>(c1),
                   inductive.begin() + static_cast<std::ptrdiff_t>(c2));
    b.test.assign(inductive.begin() + static_cast<std::ptrdiff_t>(c2), inductive.end());

    finalize(b, graph);
    return b;
}

SplitBundle build_si_split(const StatementGraph& graph, const SamplerConfig& cfg) {
    cfg.validate();
    if (graph.statements.empty()) throw SplitError("cannot split an empty graph");
    Rng rng(cfg.seed);

    std::vector<EntityId> ents = statement_entities(graph.statements);
    rng.shuffle(ents);
    const auto total = ents.size();
    const auto c1 = static_cast<std::size_t>(
        std::llround(cfg.si_fractions[0] * static_cast<double>(total)));
    const auto c2 = static_cast<std::size_t>(
        std::llround((cfg.si_fractions[0] + cfg.si_fractions[1]) * static_cast<double>(total)));
    const EntitySet train_split(ents.begin(), ents.begin() + static_cast<std::ptrdiff_t>(c1));
    const EntitySet valid_split(ents.begin() + static_cast<std::ptrdiff_t>(c1),
                                ents.begin() + static_cast<std::ptrdiff_t>(c2));
    const EntitySet test_split(ents.begin() + static_cast<std::ptrdiff_t>(c2), ents.end());

    SplitBundle b;
    b.mode = SplitMode::SemiInductive;

    // Train: both endpoints in the train entity split; qualifiers restricted
    // to train-split entities (pair dropped, statement kept).
    for (const auto& s : graph.statements) {
        if (!train_split.count(s.head) || !train_split.count(s.tail)) continue;
        std::vector<QualifierPair> quals;
        for (const auto& q : s.qualifiers) {
            if (train_split.count(q.entity)) quals.push_back(q);
        }
        b.train.push_back(Statement::make(s.head, s.relation, s.tail, std::move(quals)));
    }

    // Effective seen set: entities actually occurring in train statements.
    // An unused train-split entity is indistinguishable from an unseen one,
    // so eval membership is decided against this set rather than the split.
    const EntitySet seen = entities_any_position(b.train);
    const RelationSet train_rels = relations_of(b.train);

    auto build_eval = [&](const EntitySet& split) {
        // Pass 1: select statements (exactly one unseen endpoint, in this
        // entity split, main relation known); collect their endpoints so the
        // qualifier rule can reference entities introduced by the split itself.
        std::vector<const Statement*> picked;
        EntitySet split_endpoints;
        for (const auto& s : graph.statements) {
            const bool head_seen = seen.count(s.head) > 0;
            const bool tail_seen = seen.count(s.tail) > 0;
            if (head_seen == tail_seen) continue;  // want exactly one unseen endpoint
            const EntityId unseen = head_seen ? s.tail : s.head;
            if (!split.count(unseen)) continue;
            if (!train_rels.count(s.relation)) continue;
            picked.push_back(&s);
            split_endpoints.insert(s.head);
            split_endpoints.insert(s.tail);
        }
        // Pass 2: qualifier pairs survive only with a known relation and an
        // entity that is either seen or an endpoint within this split.
        std::vector<Statement> out;
        out.reserve(picked.size());
        for (const Statement* s : picked) {
            std::vector<QualifierPair> quals;
            for (const auto& q : s->qualifiers) {
                if (!train_rels.count(q.relation)) continue;
                if (seen.count(q.entity) || split_endpoints.count(q.entity)) quals.push_back(q);
            }
            out.push_back(Statement::make(s->head, s->relation, s->tail, std::move(quals)));
        }
        return out;
    };
    b.valid = build_eval(valid_split);
    b.test = build_eval(test_split);

    finalize(b, graph);
    return b;
}

namespace {

void add_counterexample(AuditCheck& check, const Statement& s, const StatementGraph& graph) {
    check.pass = false;
    if (check.counterexamples.size() < 5) {
        // Violating statements may reference ids outside the vocabulary;
        // fall back to the raw id rather than crash the report.
        auto ent = [&](EntityId e) {
            return e >= 0 && static_cast<std::size_t>(e) < graph.entities.size()
                       ? graph.entities.label(e)
                       : "#" + std::to_string(e);
        };
        auto rel = [&](RelationId r) {
            return r >= 0 && static_cast<std::size_t>(r) < graph.relations.size()
                       ? graph.relations.label(r)
                       : "#" + std::to_string(r);
        };
        std::string line = ent(s.head) + "," + rel(s.relation) + "," + ent(s.tail);
        for (const auto& q : s.qualifiers) line += "," + rel(q.relation) + "," + ent(q.entity);
        check.counterexamples.push_back(std::move(line));
    }
}

}  // namespace

AuditReport audit(const SplitBundle& b, const StatementGraph& graph) {
    AuditReport report;
    const auto& seen = b.seen_entities;
    const RelationSet train_rels = relations_of(b.train);

    AuditCheck rel_cover{"relation-coverage", true, {}};
    for (const auto* split : {&b.valid, &b.test, &b.inference}) {
        for (const auto& s : *split) {
            bool ok = train_rels.count(s.relation) > 0;
            for (const auto& q : s.qualifiers) ok = ok && train_rels.count(q.relation) > 0;
            if (!ok) add_counterexample(rel_cover, s, graph);
        }
    }
    report.checks.push_back(std::move(rel_cover));

    if (b.mode == SplitMode::FullyInductive) {
        AuditCheck disjoint{"fi-entity-disjointness", true, {}};
        for (const auto* split : {&b.inference, &b.valid, &b.test}) {
            for (const auto& s : *split) {
                bool ok = !seen.count(s.head) && !seen.count(s.tail);
                for (const auto& q : s.qualifiers) ok = ok && !seen.count(q.entity);
                if (!ok) add_counterexample(disjoint, s, graph);
            }
        }
        report.checks.push_back(std::move(disjoint));

        AuditCheck overlap{"fi-split-disjointness", true, {}};
        const std::set<Statement> inf(b.inference.begin(), b.inference.end());
        const std::set<Statement> valid(b.valid.begin(), b.valid.end());
        for (const auto& s : b.valid) {
            if (inf.count(s)) add_counterexample(overlap, s, graph);
        }
        for (const auto& s : b.test) {
            if (inf.count(s) || valid.count(s)) add_counterexample(overlap, s, graph);
        }
        report.checks.push_back(std::move(overlap));
    } else {
        AuditCheck empty_inf{"si-inference-empty", true, {}};
        for (const auto& s : b.inference) add_counterexample(empty_inf, s, graph);
        report.checks.push_back(std::move(empty_inf));

        AuditCheck endpoint{"si-endpoint-rule", true, {}};
        AuditCheck qual_allowed{"si-qualifier-allowed", true, {}};
        for (const auto* split : {&b.valid, &b.test}) {
            EntitySet split_entities;
            for (const auto& s : *split) {
                split_entities.insert(s.head);
                split_entities.insert(s.tail);
            }
            for (const auto& s : *split) {
                const bool head_seen = seen.count(s.head) > 0;
                const bool tail_seen = seen.count(s.tail) > 0;
                if (head_seen == tail_seen) add_counterexample(endpoint, s, graph);
                for (const auto& q : s.qualifiers) {
                    if (!seen.count(q.entity) && !split_entities.count(q.entity)) {
                        add_counterexample(qual_allowed, s, graph);
                    }
                }
            }
        }
        report.checks.push_back(std::move(endpoint));
        report.checks.push_back(std::move(qual_allowed));
    }
    return report;
}

std::string AuditReport::to_string() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.pass ? "[pass] " : "[FAIL] ") << c.name << "\n";
        for (const auto& ex : c.counterexamples) out << "    " << ex << "\n";
    }
    return out.str();
}

void write_split(const std::string& dir, const SplitBundle& b, const StatementGraph& graph,
                 const SamplerConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_statement_file(dir + "/train.txt", b.train, graph.entities, graph.relations);
    write_statement_file(dir + "/valid.txt", b.valid, graph.entities, graph.relations);
    write_statement_file(dir + "/test.txt", b.test, graph.entities, graph.relations);
    if (b.mode == SplitMode::FullyInductive) {
        write_statement_file(dir + "/inference.txt", b.inference, graph.entities, graph.relations);
    }

    nlohmann::json stats;
    auto split_json = [](const SplitStats& st) {
        return nlohmann::json{{"statements", st.statements},
                              {"qualifier_share", st.qualifier_share},
                              {"entities", st.entities},
                              {"relations", st.relations}};
    };
    stats["mode"] = b.mode == SplitMode::FullyInductive ? "fi" : "si";
    stats["train"] = split_json(b.train_stats);
    stats["valid"] = split_json(b.valid_stats);
    stats["test"] = split_json(b.test_stats);
    if (b.mode == SplitMode::FullyInductive) {
        stats["inference"] = split_json(b.inference_stats);
        stats["eval_entities_outside_inference"] = b.eval_entities_outside_inference;
    }
    stats["seed"] = cfg.seed;
    stats["config"] = {{"n", cfg.n},
                       {"k", cfg.k},
                       {"m", cfg.m},
                       {"l", cfg.l},
                       {"fi_ratios", cfg.fi_ratios},
                       {"si_fractions", cfg.si_fractions}};
    std::ofstream out(dir + "/stats.json", std::ios::binary);
    out << stats.dump(2) << "\n";
}

}  // namespace hrlp
