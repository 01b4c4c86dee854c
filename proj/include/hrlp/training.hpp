#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrlp/eval.hpp"
#include "hrlp/features.hpp"
#include "hrlp/kg.hpp"
#include "hrlp/model.hpp"
#include "hrlp/rng.hpp"

namespace hrlp {

enum class Regime { SLCWA, LCWA };
enum class LossKind { MarginRanking, BCE };

struct TrainConfig {
    Regime regime = Regime::LCWA;
    LossKind loss = LossKind::BCE;
    double margin = 1.0;
    double label_smoothing = 0.1;
    int negatives = 16;  // per positive, sLCWA only
    double learning_rate = 1e-3;
    int batch_size = 128;
    int max_epochs = 1000;
    // Evaluations without relative Hits@10 improvement > min_rel_improvement
    // before stopping; with eval_frequency 1 this counts epochs.
    int patience = 200;
    double min_rel_improvement = 0.003;
    int eval_frequency = 1;
    std::uint64_t seed = 0;

    void validate() const;  // enforces the regime <-> loss pairing
};

// Plain-value loss formulas (the tape versions must agree with these).
double margin_ranking_loss(double pos_score, double neg_score, double margin);
// Mean BCE over candidates; labels in {0,1} before smoothing.
double bce_loss(std::span<const double> logits, std::span<const double> labels,
                double label_smoothing);

enum class CorruptSide { Head, Tail };
// Each negative replaces the chosen endpoint with a uniform candidate
// different from the original; qualifiers untouched.
std::vector<Statement> negative_sample(const Statement& s, std::span<const EntityId> candidates,
                                       std::size_t count, Rng& rng, CorruptSide side);

// (head-or-tail query source, relation row) -> known targets; LCWA labels.
struct LabelIndex {
    std::unordered_map<std::uint64_t, std::vector<EntityId>> targets;
    static LabelIndex build(const StatementGraph& graph, const ModelParams& params);
};

// Forward + backward over one batch of training statements (both prediction
// sides per statement); gradients accumulate into the model tensors.
double accumulate_gradients(ModelParams& model, const StatementGraph& graph,
                            const FeatureTable& features, std::span<const std::size_t> batch,
                            const TrainConfig& cfg, const LabelIndex* labels, Rng& rng);

// Copy of every parameter gradient for one batch (exact differentiation).
std::vector<std::pair<std::string, Matrix>> gradients(ModelParams& model,
                                                      const StatementGraph& graph,
                                                      const FeatureTable& features,
                                                      std::span<const std::size_t> batch,
                                                      const TrainConfig& cfg);

struct TrainLogEntry {
    int epoch{};
    double train_loss{};
    Metrics valid;
};

struct TrainResult {
    ModelParams params;  // best-validation parameters
    std::vector<TrainLogEntry> log;
    int best_epoch{};
    double best_hits10{};
    int epochs_run{};
};

struct TrainData {
    const StatementGraph* train_graph{};
    const FeatureTable* train_features{};
    // Validation context for early stopping (may equal the train context).
    const StatementGraph* eval_graph{};
    const FeatureTable* eval_features{};
    const std::vector<Statement>* valid{};
    const std::vector<EntityId>* eval_candidates{};
    const FilterDb* filter{};
    EvalOptions eval_options;
};

TrainResult train(ModelParams model, const TrainData& data, const TrainConfig& cfg);

}  // namespace hrlp
