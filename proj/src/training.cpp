#include "hrlp/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hrlp {

void TrainConfig::validate() const {
    if (regime == Regime::SLCWA && loss != LossKind::MarginRanking) {
        throw std::invalid_argument("sLCWA pairs with the margin ranking loss");
    }
    if (regime == Regime::LCWA && loss != LossKind::BCE) {
        throw std::invalid_argument("LCWA pairs with the binary cross entropy loss");
    }
    if (margin < 0.0) throw std::invalid_argument("margin must be nonnegative");
    if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
        throw std::invalid_argument("label smoothing must lie in [0, 1)");
    }
    if (batch_size < 1 || max_epochs < 1 || patience < 1 || eval_frequency < 1 || negatives < 1) {
        throw std::invalid_argument("batch/epoch/patience/frequency/negatives must be positive");
    }
    if (learning_rate < 0.0) throw std::invalid_argument("learning rate must be nonnegative");
}

double margin_ranking_loss(double pos_score, double neg_score, double margin) {
    if (margin < 0.0) throw std::invalid_argument("margin must be nonnegative");
    return std::max(0.0, margin + neg_score - pos_score);
}

double bce_loss(std::span<const double> logits, std::span<const double> labels,
                double label_smoothing) {
    if (logits.size() != labels.size() || logits.empty()) {
        throw std::invalid_argument("bce_loss: size mismatch");
    }
    const double n = static_cast<double>(logits.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double x = logits[i];
        const double l = labels[i] * (1.0 - label_smoothing) + label_smoothing / n;
        loss += std::max(x, 0.0) - x * l + std::log1p(std::exp(-std::abs(x)));
    }
    return loss / n;
}

std::vector<Statement> negative_sample(const Statement& s, std::span<const EntityId> candidates,
                                       std::size_t count, Rng& rng, CorruptSide side) {
    const EntityId original = side == CorruptSide::Tail ? s.tail : s.head;
    bool has_alternative = false;
    for (EntityId c : candidates) {
        if (c != original) {
            has_alternative = true;
            break;
        }
    }
    if (!has_alternative) {
        throw std::invalid_argument("negative_sample: candidate set contains only the original");
    }
    std::vector<Statement> out;
    out.reserve(count);
    while (out.size() < count) {
        const EntityId pick = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
        if (pick == original) continue;
        Statement neg = s;
        (side == CorruptSide::Tail ? neg.tail : neg.head) = pick;
        out.push_back(std::move(neg));
    }
    return out;
}

LabelIndex LabelIndex::build(const StatementGraph& graph, const ModelParams& params) {
    LabelIndex idx;
    for (const auto& s : graph.statements) {
        idx.targets[FilterDb::key(params.relation_row(s.relation), s.head)].push_back(s.tail);
        idx.targets[FilterDb::key(params.inverse_row(s.relation), s.tail)].push_back(s.head);
    }
    return idx;
}

namespace {

struct BatchQueries {
    std::vector<ScoreQuery> queries;
    std::vector<EntityId> true_targets;
};

BatchQueries build_queries(const StatementGraph& graph, const ModelParams& model,
                           std::span<const std::size_t> batch) {
    BatchQueries bq;
    for (std::size_t idx : batch) {
        const Statement& s = graph.statements[idx];
        bq.queries.push_back({s.head, model.relation_row(s.relation), &s.qualifiers});
        bq.true_targets.push_back(s.tail);
        bq.queries.push_back({s.tail, model.inverse_row(s.relation), &s.qualifiers});
        bq.true_targets.push_back(s.head);
    }
    return bq;
}

}  // namespace

double accumulate_gradients(ModelParams& model, const StatementGraph& graph,
                            const FeatureTable& features, std::span<const std::size_t> batch,
                            const TrainConfig& cfg, const LabelIndex* labels, Rng& rng) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    const int n_entities = static_cast<int>(graph.num_entities());

    Tape tape;
    const EncodedGraph enc = encode_graph(tape, model, graph, features);
    const BatchQueries bq = build_queries(graph, model, batch);
    const Var pooled = decode_pool(tape, model, enc, bq.queries);

    Var loss;
    if (cfg.regime == Regime::LCWA) {
        // 1-N scoring against every training entity with multi-hot labels.
        const Var scores = score_candidates(tape, pooled, enc.entities);
        Matrix label_mat(static_cast<int>(bq.queries.size()), n_entities);
        const double eps = cfg.label_smoothing;
        const double off = eps / static_cast<double>(n_entities);
        for (double& x : label_mat.data) x = off;
        for (std::size_t i = 0; i < bq.queries.size(); ++i) {
            const auto it = labels->targets.find(
                FilterDb::key(bq.queries[i].rel_row, bq.queries[i].head));
            if (it != labels->targets.end()) {
                for (EntityId t : it->second) {
                    label_mat.at(static_cast<int>(i), t) = (1.0 - eps) + off;
                }
            }
        }
        loss = tape.bce_with_logits(scores, std::move(label_mat));
    } else {
        // sLCWA: negatives corrupt the query target.
        std::vector<EntityId> all_entities(static_cast<std::size_t>(n_entities));
        for (int e = 0; e < n_entities; ++e) all_entities[static_cast<std::size_t>(e)] = e;
        std::vector<int> pos_rows, pooled_rep_rows;
        std::vector<int> neg_rows;
        for (std::size_t i = 0; i < bq.queries.size(); ++i) {
            const EntityId target = bq.true_targets[i];
            for (int k = 0; k < cfg.negatives; ++k) {
                EntityId pick;
                do {
                    pick = all_entities[static_cast<std::size_t>(rng.below(all_entities.size()))];
                } while (pick == target);
                pooled_rep_rows.push_back(static_cast<int>(i));
                pos_rows.push_back(target);
                neg_rows.push_back(pick);
            }
        }
        const Var pooled_rep = tape.gather_rows(pooled, pooled_rep_rows);
        const Var pos_scores =
            tape.rowwise_dot(pooled_rep, tape.gather_rows(enc.entities, pos_rows));
        const Var neg_scores =
            tape.rowwise_dot(pooled_rep, tape.gather_rows(enc.entities, neg_rows));
        loss = tape.margin_ranking(pos_scores, neg_scores, cfg.margin);
    }

    tape.backward(loss);
    const double loss_value = tape.value(loss).at(0, 0);
    if (!std::isfinite(loss_value)) throw NumericError("non-finite training loss");
    return loss_value;
}

std::vector<std::pair<std::string, Matrix>> gradients(ModelParams& model,
                                                      const StatementGraph& graph,
                                                      const FeatureTable& features,
                                                      std::span<const std::size_t> batch,
                                                      const TrainConfig& cfg) {
    cfg.validate();
    model.zero_grads();
    LabelIndex labels;
    if (cfg.regime == Regime::LCWA) labels = LabelIndex::build(graph, model);
    Rng rng(cfg.seed);
    accumulate_gradients(model, graph, features, batch, cfg,
                         cfg.regime == Regime::LCWA ? &labels : nullptr, rng);
    std::vector<std::pair<std::string, Matrix>> out;
    out.reserve(model.tensors.size());
    for (const auto& t : model.tensors) out.emplace_back(t.name, t.grad);
    return out;
}

namespace {

// Bias-corrected two-moment adaptive optimizer.
class Adam {
public:
    Adam(ModelParams& params, double lr) : lr_(lr) {
        for (const auto& t : params.tensors) {
            m_.emplace_back(t.value.rows, t.value.cols);
            v_.emplace_back(t.value.rows, t.value.cols);
        }
    }

    void step(ModelParams& params) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params.tensors.size(); ++i) {
            Tensor& p = params.tensors[i];
            for (std::size_t j = 0; j < p.value.size(); ++j) {
                const double g = p.grad.data[j];
                if (!std::isfinite(g)) {
                    throw NumericError("non-finite gradient in tensor '" + p.name + "'");
                }
                m_[i].data[j] = beta1_ * m_[i].data[j] + (1.0 - beta1_) * g;
                v_[i].data[j] = beta2_ * v_[i].data[j] + (1.0 - beta2_) * g * g;
                const double mhat = m_[i].data[j] / bc1;
                const double vhat = v_[i].data[j] / bc2;
                p.value.data[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

private:
    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    int t_ = 0;
    std::vector<Matrix> m_, v_;
};

}  // namespace

TrainResult train(ModelParams model, const TrainData& data, const TrainConfig& cfg) {
    cfg.validate();
    const StatementGraph& graph = *data.train_graph;
    if (graph.statements.empty()) throw std::invalid_argument("train: empty training set");

    LabelIndex labels;
    if (cfg.regime == Regime::LCWA) labels = LabelIndex::build(graph, model);

    Rng rng(cfg.seed);
    Adam opt(model, cfg.learning_rate);

    std::vector<std::size_t> order(graph.statements.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    result.best_hits10 = -1.0;
    ModelParams best = model;

    double loss_accum = 0.0;
    std::size_t loss_batches = 0;
    int evals_without_improvement = 0;

    const bool can_validate = data.valid && !data.valid->empty() && data.eval_graph &&
                              data.eval_features && data.eval_candidates && data.filter;

    int epoch = 0;
    for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            model.zero_grads();
            loss_accum += accumulate_gradients(
                model, graph, *data.train_features,
                std::span<const std::size_t>(order.data() + start, stop - start), cfg,
                cfg.regime == Regime::LCWA ? &labels : nullptr, rng);
            ++loss_batches;
            opt.step(model);
        }
        model.check_finite("after epoch " + std::to_string(epoch));

        if (epoch % cfg.eval_frequency != 0) continue;

        TrainLogEntry entry;
        entry.epoch = epoch;
        entry.train_loss = loss_batches ? loss_accum / static_cast<double>(loss_batches) : 0.0;
        loss_accum = 0.0;
        loss_batches = 0;

        if (can_validate) {
            const EvalOutcome outcome =
                evaluate(model, *data.eval_graph, *data.eval_features, *data.valid,
                         *data.eval_candidates, *data.filter, data.eval_options);
            entry.valid = outcome.combined;
            const double hits10 = outcome.combined.hits.count(10) ? outcome.combined.hits.at(10)
                                                                  : outcome.combined.mrr;
            const bool improved =
                result.best_hits10 < 0.0 ||
                hits10 > result.best_hits10 * (1.0 + cfg.min_rel_improvement) ||
                (result.best_hits10 == 0.0 && hits10 > 0.0);
            if (improved) {
                result.best_hits10 = hits10;
                result.best_epoch = epoch;
                best = model;
                evals_without_improvement = 0;
            } else {
                ++evals_without_improvement;
            }
            result.log.push_back(entry);
            if (evals_without_improvement >= cfg.patience) break;
        } else {
            result.log.push_back(entry);
        }
    }

    result.epochs_run = std::min(epoch, cfg.max_epochs);
    result.params = can_validate && result.best_hits10 >= 0.0 ? std::move(best) : std::move(model);
    return result;
}

}  // namespace hrlp
