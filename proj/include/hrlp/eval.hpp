#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "hrlp/model.hpp"

namespace hrlp {

enum class Side { Tail, Head };
enum class TieMode { Optimistic, Realistic, Pessimistic };

struct RankResult {
    double optimistic{};
    double pessimistic{};
    double realistic{};  // midpoint of the other two
    int pool{};          // candidate-set size after filtering
    double pick(TieMode m) const {
        switch (m) {
            case TieMode::Optimistic: return optimistic;
            case TieMode::Pessimistic: return pessimistic;
            case TieMode::Realistic: return realistic;
        }
        return realistic;
    }
};

// Filtered ranking with tie handling. `filter` marks candidates removed from
// the comparison; the true index must not be filtered.
RankResult rank(const std::vector<double>& scores, int true_index, const std::vector<char>& filter);

struct Metrics {
    double mr{};
    double mrr{};
    double amr{};  // percent; 100 = random-scorer expectation
    std::map<int, double> hits;
    std::size_t queries{};
};

Metrics metrics(const std::vector<RankResult>& ranks, const std::vector<int>& ks,
                TieMode tie = TieMode::Realistic);

// True main triples, used to filter known answers. Qualifier-agnostic:
// any statement sharing the main triple filters the target.
struct FilterDb {
    std::unordered_map<std::uint64_t, std::vector<EntityId>> targets;

    static std::uint64_t key(int rel_row, EntityId source) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(rel_row)) << 32) |
               static_cast<std::uint32_t>(source);
    }
    void add_main_triples(const std::vector<Statement>& statements, const ModelParams& params);
    const std::vector<EntityId>* find(int rel_row, EntityId source) const;
};

struct QueryRank {
    Side side{};
    std::size_t statement_index{};
    std::size_t qualifier_count{};
    RelationId relation{};
    RankResult rank;
};

struct EvalOptions {
    std::vector<int> ks{1, 5, 10};
    bool filtered = true;
    TieMode tie = TieMode::Realistic;
    int batch_size = 64;
    bool compgcn_mode = false;
};

struct EvalOutcome {
    Metrics tail, head, combined;
    std::vector<QueryRank> per_query;
};

// Head and tail prediction over `queries`; head queries go through the
// inverse relation. Queries whose true target is not a candidate (the
// unseen endpoint in SI) are skipped.
EvalOutcome evaluate(ModelParams& model, const StatementGraph& rep_graph,
                     const FeatureTable& features, const std::vector<Statement>& queries,
                     const std::vector<EntityId>& candidates, const FilterDb& filter,
                     const EvalOptions& opts);

}  // namespace hrlp
