#include "hrlp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hrlp {

RankResult rank(const std::vector<double>& scores, int true_index,
                const std::vector<char>& filter) {
    if (scores.size() != filter.size()) throw std::invalid_argument("rank: filter size mismatch");
    if (true_index < 0 || true_index >= static_cast<int>(scores.size())) {
        throw std::invalid_argument("rank: true index out of range");
    }
    if (filter[static_cast<std::size_t>(true_index)]) {
        throw std::invalid_argument("rank: true index is filtered");
    }
    const double true_score = scores[static_cast<std::size_t>(true_index)];
    int greater = 0;
    int geq = 0;
    int pool = 0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (filter[j]) continue;
        ++pool;
        if (scores[j] > true_score) ++greater;
        if (scores[j] >= true_score) ++geq;
    }
    RankResult r;
    r.optimistic = 1.0 + greater;
    r.pessimistic = geq;
    r.realistic = 0.5 * (r.optimistic + r.pessimistic);
    r.pool = pool;
    return r;
}

Metrics metrics(const std::vector<RankResult>& ranks, const std::vector<int>& ks, TieMode tie) {
    if (ranks.empty()) throw std::invalid_argument("metrics: empty rank set");
    Metrics m;
    m.queries = ranks.size();
    double expected_sum = 0.0;
    for (const auto& r : ranks) {
        const double rk = r.pick(tie);
        m.mr += rk;
        m.mrr += 1.0 / rk;
        expected_sum += 0.5 * (r.pool + 1);
        for (int k : ks) {
            if (rk <= k) m.hits[k] += 1.0;
        }
    }
    const double n = static_cast<double>(ranks.size());
    m.mr /= n;
    m.mrr /= n;
    for (int k : ks) m.hits[k] /= n;  // creates the entry even when zero
    m.amr = 100.0 * m.mr / (expected_sum / n);
    return m;
}

void FilterDb::add_main_triples(const std::vector<Statement>& statements,
                                const ModelParams& params) {
    for (const auto& s : statements) {
        targets[key(params.relation_row(s.relation), s.head)].push_back(s.tail);
        targets[key(params.inverse_row(s.relation), s.tail)].push_back(s.head);
    }
}

const std::vector<EntityId>* FilterDb::find(int rel_row, EntityId source) const {
    auto it = targets.find(key(rel_row, source));
    return it == targets.end() ? nullptr : &it->second;
}

EvalOutcome evaluate(ModelParams& model, const StatementGraph& rep_graph,
                     const FeatureTable& features, const std::vector<Statement>& queries,
                     const std::vector<EntityId>& candidates, const FilterDb& filter,
                     const EvalOptions& opts) {
    if (candidates.empty()) throw std::invalid_argument("evaluate: empty candidate set");

    std::unordered_map<EntityId, int> candidate_pos;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        candidate_pos.emplace(candidates[i], static_cast<int>(i));
    }

    struct Pending {
        ScoreQuery query;
        Side side;
        std::size_t statement_index;
        int true_pos;
        int filter_rel_row;
        EntityId filter_source;
    };
    std::vector<Pending> pending;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& s = queries[i];
        if (auto it = candidate_pos.find(s.tail); it != candidate_pos.end()) {
            pending.push_back({ScoreQuery{s.head, model.relation_row(s.relation), &s.qualifiers},
                               Side::Tail, i, it->second, model.relation_row(s.relation), s.head});
        }
        if (auto it = candidate_pos.find(s.head); it != candidate_pos.end()) {
            pending.push_back({ScoreQuery{s.tail, model.inverse_row(s.relation), &s.qualifiers},
                               Side::Head, i, it->second, model.inverse_row(s.relation), s.tail});
        }
    }

    EvalOutcome out;
    if (pending.empty()) return out;

    Tape tape;
    const EncodedGraph enc = encode_graph(tape, model, rep_graph, features, opts.compgcn_mode);
    const Var cand_matrix =
        tape.gather_rows(enc.entities, std::vector<int>(candidates.begin(), candidates.end()));

    std::vector<RankResult> tail_ranks, head_ranks, all_ranks;
    for (std::size_t start = 0; start < pending.size();
         start += static_cast<std::size_t>(opts.batch_size)) {
        const std::size_t stop =
            std::min(pending.size(), start + static_cast<std::size_t>(opts.batch_size));
        std::vector<ScoreQuery> batch;
        for (std::size_t i = start; i < stop; ++i) batch.push_back(pending[i].query);
        const Var pooled = decode_pool(tape, model, enc, batch);
        const Var score_var = score_candidates(tape, pooled, cand_matrix);
        const Matrix& scores = tape.value(score_var);

        for (std::size_t i = start; i < stop; ++i) {
            const Pending& p = pending[i];
            const int row = static_cast<int>(i - start);
            std::vector<double> row_scores(candidates.size());
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                row_scores[c] = scores.at(row, static_cast<int>(c));
            }
            std::vector<char> mask(candidates.size(), 0);
            if (opts.filtered) {
                if (const auto* known = filter.find(p.filter_rel_row, p.filter_source)) {
                    for (EntityId t : *known) {
                        auto it = candidate_pos.find(t);
                        if (it != candidate_pos.end()) mask[static_cast<std::size_t>(it->second)] = 1;
                    }
                }
                mask[static_cast<std::size_t>(p.true_pos)] = 0;  // never filter the target
            }
            const RankResult r = rank(row_scores, p.true_pos, mask);
            (p.side == Side::Tail ? tail_ranks : head_ranks).push_back(r);
            all_ranks.push_back(r);
            out.per_query.push_back({p.side, p.statement_index,
                                     queries[p.statement_index].qualifiers.size(),
                                     queries[p.statement_index].relation, r});
        }
    }

    if (!tail_ranks.empty()) out.tail = metrics(tail_ranks, opts.ks, opts.tie);
    if (!head_ranks.empty()) out.head = metrics(head_ranks, opts.ks, opts.tie);
    out.combined = metrics(all_ranks, opts.ks, opts.tie);
    return out;
}

}  // namespace hrlp
