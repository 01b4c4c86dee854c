#pragma once

#include <map>
#include <string>
#include <vector>

#include "hrlp/eval.hpp"
#include "hrlp/model.hpp"

namespace hrlp {

// Removes every qualifier pair whose relation matches; main triples and the
// input are untouched.
std::vector<Statement> mask_qualifier_relation(const std::vector<Statement>& statements,
                                               RelationId relation);
StatementGraph mask_qualifier_relation(const StatementGraph& graph, RelationId relation);

// Realistic head/tail ranks bucketed by the statement's qualifier-pair count.
std::map<std::size_t, std::vector<double>> ranks_by_qualifier_count(const EvalOutcome& outcome);

enum class MaskScope { PerStatement, Global };

struct MaskReport {
    RelationId relation{};
    std::string label;
    MaskScope scope{};
    double mr_unmasked{};
    double mr_masked{};
    double delta_mr{};  // unmasked - masked; negative = the qualifier helps
    std::size_t affected_queries{};
    std::size_t occurrences{};  // qualifier pairs with this relation in graph + queries
};

struct AnalysisContext {
    const StatementGraph* rep_graph{};
    const FeatureTable* features{};
    const std::vector<Statement>* queries{};
    const std::vector<EntityId>* candidates{};
    const FilterDb* filter{};
    EvalOptions options;
};

// Mean-rank shift from masking one qualifier relation. PerStatement scope
// restricts MR to queries whose statement carries the relation as a
// qualifier and (by default) masks the eval statements too; Global scope
// masks the representation graph only and counts all queries.
MaskReport delta_mr(ModelParams& model, const AnalysisContext& ctx, RelationId relation,
                    MaskScope scope, bool mask_eval_statements = true);

}  // namespace hrlp
