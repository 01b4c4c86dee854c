#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "hrlp/kg.hpp"

namespace hrlp {

struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SplitMode { SemiInductive, FullyInductive };

struct SamplerConfig {
    std::uint64_t seed{0};
    // FI: n seed entities with k-hop neighbourhood form the train graph;
    // m fresh seeds with l-hop neighbourhood form the inductive pool.
    std::size_t n{4};
    std::size_t k{2};
    std::size_t m{4};
    std::size_t l{2};
    std::array<double, 3> fi_ratios{0.55, 0.20, 0.25};  // inference / valid / test
    std::array<double, 3> si_fractions{0.8, 0.1, 0.1};  // train / valid / test entity split

    void validate() const;
};

struct SplitStats {
    std::size_t statements{};
    double qualifier_share{};  // Q% in [0,1]
    std::size_t entities{};
    std::size_t relations{};
};

struct SplitBundle {
    SplitMode mode{};
    std::vector<Statement> train, valid, test, inference;  // ids in the source graph vocab
    std::unordered_set<EntityId> seen_entities;            // any position in train
    SplitStats train_stats, valid_stats, test_stats, inference_stats;
    // FI: eval entities that never appear in an inference-graph main triple.
    std::size_t eval_entities_outside_inference{0};
};

struct AuditCheck {
    std::string name;
    bool pass{};
    std::vector<std::string> counterexamples;  // up to 5
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    bool pass() const {
        for (const auto& c : checks) {
            if (!c.pass) return false;
        }
        return true;
    }
    std::string to_string() const;
};

SplitBundle build_fi_split(const StatementGraph& graph, const SamplerConfig& cfg);
SplitBundle build_si_split(const StatementGraph& graph, const SamplerConfig& cfg);

AuditReport audit(const SplitBundle& bundle, const StatementGraph& graph);

// Writes train/valid/test(.txt), inference.txt (FI only) and stats.json.
void write_split(const std::string& dir, const SplitBundle& bundle, const StatementGraph& graph,
                 const SamplerConfig& cfg);

}  // namespace hrlp
