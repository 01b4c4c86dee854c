#include "hrlp/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "hrlp/rng.hpp"

namespace hrlp {

void ModelConfig::validate() const {
    if (qp_slots != 0 && qp_slots != 2 && qp_slots != 4 && qp_slots != 6) {
        throw std::invalid_argument("qp_slots must be one of {0, 2, 4, 6}");
    }
    if (d_r <= 0 || feature_dim <= 0) throw std::invalid_argument("d_r and feature_dim must be positive");
    if (d_r % heads != 0) throw std::invalid_argument("d_r must be divisible by the head count");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (tf_layers < 1 || heads < 1 || ffn_hidden < 1 || stare_layers < 1) {
        throw std::invalid_argument("layer/head/hidden counts must be positive");
    }
}

namespace {

Matrix uniform_init(int rows, int cols, int fan_in, Rng& rng) {
    Matrix m(rows, cols);
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : m.data) x = rng.uniform(-a, a);
    return m;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, int num_relations, std::uint64_t seed) {
    cfg.validate();
    if (num_relations <= 0) throw std::invalid_argument("need at least one relation");
    ModelParams p;
    p.cfg = cfg;
    p.num_relations = num_relations;
    Rng rng(seed);

    auto add = [&](const std::string& name, Matrix m) {
        p.index.emplace(name, static_cast<int>(p.tensors.size()));
        p.tensors.push_back(Tensor{name, std::move(m), Matrix()});
    };

    const int d = cfg.d_r;
    add("relation_table", uniform_init(2 * num_relations + 1, d, d, rng));
    add("enc.proj", uniform_init(cfg.feature_dim, d, cfg.feature_dim, rng));
    add("enc.bias", Matrix(1, d));

    if (cfg.encoder == EncoderKind::Stare) {
        for (int i = 0; i < cfg.stare_layers; ++i) {
            const std::string pre = "stare" + std::to_string(i) + ".";
            add(pre + "w_in", uniform_init(d, d, d, rng));
            add(pre + "w_out", uniform_init(d, d, d, rng));
            add(pre + "w_loop", uniform_init(d, d, d, rng));
            add(pre + "w_rel", uniform_init(d, d, d, rng));
            add(pre + "w_q", uniform_init(d, d, d, rng));
            if (cfg.qual_aggr == QualifierAggregation::Attention) {
                add(pre + "w_att", uniform_init(d, 1, d, rng));
            }
        }
    }

    add("dec.pad", uniform_init(1, d, d, rng));
    add("dec.pos", uniform_init(4, d, d, rng));
    for (int i = 0; i < cfg.tf_layers; ++i) {
        const std::string pre = "dec" + std::to_string(i) + ".";
        for (const char* w : {"wq", "wk", "wv", "wo"}) add(pre + w, uniform_init(d, d, d, rng));
        for (const char* b : {"bq", "bk", "bv", "bo"}) add(pre + b, Matrix(1, d));
        Matrix ones(1, d, 1.0);
        add(pre + "ln1.g", ones);
        add(pre + "ln1.b", Matrix(1, d));
        add(pre + "ffn.w1", uniform_init(d, cfg.ffn_hidden, d, rng));
        add(pre + "ffn.b1", Matrix(1, cfg.ffn_hidden));
        add(pre + "ffn.w2", uniform_init(cfg.ffn_hidden, d, cfg.ffn_hidden, rng));
        add(pre + "ffn.b2", Matrix(1, d));
        add(pre + "ln2.g", ones);
        add(pre + "ln2.b", Matrix(1, d));
    }

    for (auto& t : p.tensors) t.grad = Matrix(t.value.rows, t.value.cols);
    return p;
}

Tensor& ModelParams::t(const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw std::logic_error("unknown tensor: " + name);
    return tensors[static_cast<std::size_t>(it->second)];
}

const Tensor& ModelParams::t(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw std::logic_error("unknown tensor: " + name);
    return tensors[static_cast<std::size_t>(it->second)];
}

void ModelParams::zero_grads() {
    for (auto& t : tensors) std::fill(t.grad.data.begin(), t.grad.data.end(), 0.0);
}

void ModelParams::check_finite(const std::string& when) const {
    for (const auto& t : tensors) {
        for (double x : t.value.data) {
            if (!std::isfinite(x)) {
                throw NumericError("non-finite value in tensor '" + t.name + "' " + when);
            }
        }
    }
}

namespace {

const char* encoder_name(EncoderKind k) { return k == EncoderKind::Stare ? "stare" : "linear"; }
const char* compose_name(ComposeOp c) { return c == ComposeOp::Multiply ? "multiply" : "subtract"; }
const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
    }
    return "tanh";
}
const char* aggr_name(QualifierAggregation q) {
    return q == QualifierAggregation::Sum ? "sum" : "attention";
}

nlohmann::json config_to_json(const ModelConfig& c) {
    return {{"encoder", encoder_name(c.encoder)},
            {"feature_dim", c.feature_dim},
            {"d_r", c.d_r},
            {"qp_slots", c.qp_slots},
            {"stare_layers", c.stare_layers},
            {"alpha", c.alpha},
            {"compose", compose_name(c.compose)},
            {"activation", activation_name(c.activation)},
            {"degree_norm", c.degree_norm},
            {"qualifier_aggregation", aggr_name(c.qual_aggr)},
            {"tf_layers", c.tf_layers},
            {"heads", c.heads},
            {"ffn_hidden", c.ffn_hidden}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.encoder = j.at("encoder") == "stare" ? EncoderKind::Stare : EncoderKind::Linear;
    c.feature_dim = j.at("feature_dim");
    c.d_r = j.at("d_r");
    c.qp_slots = j.at("qp_slots");
    c.stare_layers = j.at("stare_layers");
    c.alpha = j.at("alpha");
    c.compose = j.at("compose") == "subtract" ? ComposeOp::Subtract : ComposeOp::Multiply;
    const std::string act = j.at("activation");
    c.activation = act == "identity" ? Activation::Identity
                                     : (act == "relu" ? Activation::Relu : Activation::Tanh);
    c.degree_norm = j.at("degree_norm");
    c.qual_aggr = j.at("qualifier_aggregation") == "attention" ? QualifierAggregation::Attention
                                                               : QualifierAggregation::Sum;
    c.tf_layers = j.at("tf_layers");
    c.heads = j.at("heads");
    c.ffn_hidden = j.at("ffn_hidden");
    return c;
}

}  // namespace

void save_checkpoint(const std::string& prefix, const ModelParams& params,
                     const std::string& extra_manifest_json) {
    std::ofstream blob(prefix + ".bin", std::ios::binary);
    if (!blob) throw FormatError("cannot write checkpoint blob: " + prefix + ".bin");
    nlohmann::json manifest;
    manifest["config"] = config_to_json(params.cfg);
    manifest["num_relations"] = params.num_relations;
    manifest["tensors"] = nlohmann::json::array();
    for (const auto& t : params.tensors) {
        manifest["tensors"].push_back({{"name", t.name}, {"rows", t.value.rows}, {"cols", t.value.cols}});
        for (double x : t.value.data) {
            const float f = static_cast<float>(x);
            blob.write(reinterpret_cast<const char*>(&f), sizeof(float));
        }
    }
    manifest["extra"] = nlohmann::json::parse(extra_manifest_json);
    std::ofstream mf(prefix + ".json", std::ios::binary);
    if (!mf) throw FormatError("cannot write checkpoint manifest: " + prefix + ".json");
    mf << manifest.dump(2) << "\n";
}

ModelParams load_checkpoint(const std::string& prefix) {
    std::ifstream mf(prefix + ".json", std::ios::binary);
    if (!mf) throw FormatError("cannot open checkpoint manifest: " + prefix + ".json");
    nlohmann::json manifest = nlohmann::json::parse(mf);
    ModelParams p = ModelParams::init(config_from_json(manifest.at("config")),
                                      manifest.at("num_relations"), 0);
    std::ifstream blob(prefix + ".bin", std::ios::binary);
    if (!blob) throw FormatError("cannot open checkpoint blob: " + prefix + ".bin");
    std::size_t i = 0;
    for (const auto& tj : manifest.at("tensors")) {
        if (i >= p.tensors.size() || p.tensors[i].name != tj.at("name")) {
            throw FormatError("checkpoint manifest does not match the model layout");
        }
        Tensor& t = p.tensors[i++];
        if (t.value.rows != tj.at("rows") || t.value.cols != tj.at("cols")) {
            throw FormatError("checkpoint tensor shape mismatch: " + t.name);
        }
        for (double& x : t.value.data) {
            float f = 0.0f;
            blob.read(reinterpret_cast<char*>(&f), sizeof(float));
            if (!blob) throw FormatError("checkpoint blob truncated at tensor " + t.name);
            x = static_cast<double>(f);
        }
    }
    return p;
}

namespace {

Matrix features_as_matrix(const FeatureTable& f) {
    Matrix m(static_cast<int>(f.num_rows()), static_cast<int>(f.dim));
    m.data = f.rows;
    return m;
}

Var activate(Tape& tape, Var x, Activation a) {
    switch (a) {
        case Activation::Tanh: return tape.tanh_act(x);
        case Activation::Relu: return tape.relu(x);
        case Activation::Identity: return x;
    }
    return x;
}

Var compose(Tape& tape, Var node_side, Var rel_side, ComposeOp op) {
    return op == ComposeOp::Multiply ? tape.hadamard(node_side, rel_side)
                                     : tape.sub(node_side, rel_side);
}

// Per-statement aggregated qualifier vectors (S x d); zero rows for
// statements without qualifiers. `has_quals` mirrors which rows are live.
Var aggregate_qualifiers(Tape& tape, ModelParams& params, const StatementGraph& graph, Var entities,
                         Var relations, int layer, std::vector<bool>& has_quals) {
    const auto& cfg = params.cfg;
    const int n_stmts = static_cast<int>(graph.statements.size());
    has_quals.assign(graph.statements.size(), false);

    std::vector<int> qe_rows, qr_rows, seg;
    for (std::size_t i = 0; i < graph.statements.size(); ++i) {
        for (const auto& q : graph.statements[i].qualifiers) {
            qe_rows.push_back(q.entity);
            qr_rows.push_back(params.relation_row(q.relation));
            seg.push_back(static_cast<int>(i));
            has_quals[i] = true;
        }
    }
    if (qe_rows.empty()) return Var{};

    const Var qe = tape.gather_rows(entities, qe_rows);
    const Var qr = tape.gather_rows(relations, qr_rows);
    const Var comp = compose(tape, qe, qr, cfg.compose);

    Var agg;
    if (cfg.qual_aggr == QualifierAggregation::Sum) {
        agg = tape.segment_sum(comp, seg, n_stmts);
    } else {
        // Attention over a statement's pairs: scores from a learned vector,
        // softmax within the statement, weighted sum.
        const std::string pre = "stare" + std::to_string(layer) + ".";
        Tensor& w_att = params.t(pre + "w_att");
        const Var att = tape.param(w_att.value, &w_att.grad);
        const Var scores =
            tape.scale(tape.matmul(comp, att), 1.0 / std::sqrt(static_cast<double>(cfg.d_r)));
        std::vector<Var> per_stmt;
        std::vector<int> stmt_seg;
        int offset = 0;
        for (int i = 0; i < n_stmts; ++i) {
            const int k = static_cast<int>(graph.statements[static_cast<std::size_t>(i)].qualifiers.size());
            if (k == 0) continue;
            const Var srow = tape.transpose(tape.slice_rows(scores, offset, k));  // 1 x k
            const Var weights = tape.masked_softmax_rows(srow, Matrix(1, k, 1.0));
            per_stmt.push_back(tape.matmul(weights, tape.slice_rows(comp, offset, k)));
            stmt_seg.push_back(i);
            offset += k;
        }
        agg = tape.segment_sum(tape.concat_rows(per_stmt), stmt_seg, n_stmts);
    }

    const std::string pre = "stare" + std::to_string(layer) + ".";
    Tensor& w_q = params.t(pre + "w_q");
    return tape.matmul(agg, tape.param(w_q.value, &w_q.grad));
}

// One StarE layer: direction-typed message passing with qualifier infusion.
std::pair<Var, Var> stare_layer(Tape& tape, ModelParams& params, const StatementGraph& graph,
                                Var entities, Var relations, int layer, bool compgcn_mode) {
    const auto& cfg = params.cfg;
    const int n_entities = static_cast<int>(graph.num_entities());
    const std::string pre = "stare" + std::to_string(layer) + ".";

    std::vector<bool> has_quals;
    Var xq;
    if (!compgcn_mode) {
        xq = aggregate_qualifiers(tape, params, graph, entities, relations, layer, has_quals);
    }

    // gamma(x_r, x_q) rows for one direction; exact identity when there are
    // no qualifiers (scale factors 1 and 0).
    auto gamma_rows = [&](const std::vector<int>& rel_rows) {
        const Var rel = tape.gather_rows(relations, rel_rows);
        if (!xq.valid()) return rel;
        std::vector<double> a(graph.statements.size()), b(graph.statements.size());
        for (std::size_t i = 0; i < graph.statements.size(); ++i) {
            a[i] = has_quals[i] ? cfg.alpha : 1.0;
            b[i] = has_quals[i] ? 1.0 - cfg.alpha : 0.0;
        }
        return tape.add(tape.row_scale(rel, a), tape.row_scale(xq, b));
    };

    std::vector<int> heads, tails, fwd_rel, rev_rel;
    for (const auto& s : graph.statements) {
        heads.push_back(s.head);
        tails.push_back(s.tail);
        fwd_rel.push_back(params.relation_row(s.relation));
        rev_rel.push_back(params.inverse_row(s.relation));
    }

    std::vector<Var> terms;
    if (!graph.statements.empty()) {
        Tensor& w_in = params.t(pre + "w_in");
        Tensor& w_out = params.t(pre + "w_out");
        // in: messages along edge direction, delivered to the tail
        const Var comp_in = compose(tape, tape.gather_rows(entities, heads), gamma_rows(fwd_rel),
                                    cfg.compose);
        terms.push_back(tape.segment_sum(tape.matmul(comp_in, tape.param(w_in.value, &w_in.grad)),
                                         tails, n_entities));
        // out: inverse-relation messages, delivered to the head
        const Var comp_out = compose(tape, tape.gather_rows(entities, tails), gamma_rows(rev_rel),
                                     cfg.compose);
        terms.push_back(tape.segment_sum(tape.matmul(comp_out, tape.param(w_out.value, &w_out.grad)),
                                         heads, n_entities));
    }

    Tensor& w_loop = params.t(pre + "w_loop");
    const std::vector<int> loop_rows(static_cast<std::size_t>(n_entities), params.loop_row());
    const Var comp_loop =
        compose(tape, entities, tape.gather_rows(relations, loop_rows), cfg.compose);
    terms.push_back(tape.matmul(comp_loop, tape.param(w_loop.value, &w_loop.grad)));

    Var summed = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) summed = tape.add(summed, terms[i]);

    if (cfg.degree_norm) {
        std::vector<double> inv_count(static_cast<std::size_t>(n_entities), 1.0);  // self loop
        for (const auto& s : graph.statements) {
            inv_count[static_cast<std::size_t>(s.tail)] += 1.0;
            inv_count[static_cast<std::size_t>(s.head)] += 1.0;
        }
        for (double& c : inv_count) c = 1.0 / c;
        summed = tape.row_scale(summed, inv_count);
    }

    const Var new_entities = activate(tape, summed, cfg.activation);
    Tensor& w_rel = params.t(pre + "w_rel");
    const Var new_relations = tape.matmul(relations, tape.param(w_rel.value, &w_rel.grad));
    return {new_entities, new_relations};
}

}  // namespace

Var linear_encode(Tape& tape, ModelParams& params, const FeatureTable& features) {
    if (static_cast<int>(features.dim) != params.cfg.feature_dim) {
        throw std::invalid_argument("feature width does not match the encoder projection");
    }
    Tensor& proj = params.t("enc.proj");
    Tensor& bias = params.t("enc.bias");
    const Var f = tape.constant(features_as_matrix(features));
    return tape.add_row_broadcast(tape.matmul(f, tape.param(proj.value, &proj.grad)),
                                  tape.param(bias.value, &bias.grad));
}

EncodedGraph encode_graph(Tape& tape, ModelParams& params, const StatementGraph& graph,
                          const FeatureTable& features, bool compgcn_mode) {
    if (features.num_rows() != graph.num_entities()) {
        throw std::invalid_argument("feature table does not cover the graph vocabulary");
    }
    Tensor& rel = params.t("relation_table");
    EncodedGraph enc;
    enc.entities = linear_encode(tape, params, features);
    enc.relations = tape.param(rel.value, &rel.grad);
    if (params.cfg.encoder == EncoderKind::Stare) {
        for (int layer = 0; layer < params.cfg.stare_layers; ++layer) {
            auto [x, r] = stare_layer(tape, params, graph, enc.entities, enc.relations, layer,
                                      compgcn_mode);
            enc.entities = x;
            enc.relations = r;
        }
    }
    return enc;
}

Var decode_pool(Tape& tape, ModelParams& params, const EncodedGraph& enc,
                const std::vector<ScoreQuery>& queries) {
    if (queries.empty()) throw std::invalid_argument("decode_pool: empty query batch");
    const auto& cfg = params.cfg;
    const int d = cfg.d_r;
    const int slots = cfg.qp_slots;
    const int seq_len = 2 + 2 * slots;
    const int batch = static_cast<int>(queries.size());

    Tensor& pad_t = params.t("dec.pad");
    Tensor& pos_t = params.t("dec.pos");
    const Var pad = tape.param(pad_t.value, &pad_t.grad);
    const Var pos = tape.param(pos_t.value, &pos_t.grad);

    // Token assembly: [head, relation, (q_rel, q_ent)*, PAD...].
    std::vector<std::pair<Var, int>> picks;
    std::vector<int> pos_ids;
    std::vector<std::vector<int>> real_rows(static_cast<std::size_t>(batch));
    picks.reserve(static_cast<std::size_t>(batch * seq_len));
    for (int b = 0; b < batch; ++b) {
        const auto& q = queries[static_cast<std::size_t>(b)];
        const int base = b * seq_len;
        picks.emplace_back(enc.entities, q.head);
        pos_ids.push_back(0);
        picks.emplace_back(enc.relations, q.rel_row);
        pos_ids.push_back(1);
        real_rows[static_cast<std::size_t>(b)] = {base, base + 1};
        const auto& quals = *q.qualifiers;
        const int used = std::min<int>(slots, static_cast<int>(quals.size()));
        for (int j = 0; j < used; ++j) {
            picks.emplace_back(enc.relations, params.relation_row(quals[static_cast<std::size_t>(j)].relation));
            pos_ids.push_back(2);
            picks.emplace_back(enc.entities, quals[static_cast<std::size_t>(j)].entity);
            pos_ids.push_back(3);
            real_rows[static_cast<std::size_t>(b)].push_back(base + 2 + 2 * j);
            real_rows[static_cast<std::size_t>(b)].push_back(base + 3 + 2 * j);
        }
        for (int j = used; j < slots; ++j) {
            picks.emplace_back(pad, 0);
            pos_ids.push_back(2);
            picks.emplace_back(pad, 0);
            pos_ids.push_back(3);
        }
    }

    Var x = tape.add(tape.select_rows(picks), tape.gather_rows(pos, pos_ids));

    // Attention masks: PAD slots are masked out as keys; pooled output is a
    // mean over real tokens only, so scores cannot depend on PAD content.
    std::vector<Matrix> masks(static_cast<std::size_t>(batch), Matrix(seq_len, seq_len));
    for (int b = 0; b < batch; ++b) {
        Matrix& m = masks[static_cast<std::size_t>(b)];
        for (int rr : real_rows[static_cast<std::size_t>(b)]) {
            const int key = rr - b * seq_len;
            for (int r = 0; r < seq_len; ++r) m.at(r, key) = 1.0;
        }
    }

    const int dh = d / cfg.heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int layer = 0; layer < cfg.tf_layers; ++layer) {
        const std::string pre = "dec" + std::to_string(layer) + ".";
        auto pvar = [&](const char* n) {
            Tensor& t = params.t(pre + n);
            return tape.param(t.value, &t.grad);
        };
        const Var q_all = tape.add_row_broadcast(tape.matmul(x, pvar("wq")), pvar("bq"));
        const Var k_all = tape.add_row_broadcast(tape.matmul(x, pvar("wk")), pvar("bk"));
        const Var v_all = tape.add_row_broadcast(tape.matmul(x, pvar("wv")), pvar("bv"));

        std::vector<Var> seq_outs;
        seq_outs.reserve(static_cast<std::size_t>(batch));
        for (int b = 0; b < batch; ++b) {
            const int base = b * seq_len;
            std::vector<Var> head_outs;
            head_outs.reserve(static_cast<std::size_t>(cfg.heads));
            const Var qs = tape.slice_rows(q_all, base, seq_len);
            const Var ks = tape.slice_rows(k_all, base, seq_len);
            const Var vs = tape.slice_rows(v_all, base, seq_len);
            for (int h = 0; h < cfg.heads; ++h) {
                const Var qh = tape.slice_cols(qs, h * dh, dh);
                const Var kh = tape.slice_cols(ks, h * dh, dh);
                const Var vh = tape.slice_cols(vs, h * dh, dh);
                const Var scores = tape.scale(tape.matmul(qh, kh, /*transpose_b=*/true), inv_sqrt_dh);
                const Var attn =
                    tape.masked_softmax_rows(scores, masks[static_cast<std::size_t>(b)]);
                head_outs.push_back(tape.matmul(attn, vh));
            }
            seq_outs.push_back(tape.concat_cols(head_outs));
        }
        const Var attn_out = tape.add_row_broadcast(
            tape.matmul(tape.concat_rows(seq_outs), pvar("wo")), pvar("bo"));
        x = tape.layer_norm(tape.add(x, attn_out), pvar("ln1.g"), pvar("ln1.b"));
        const Var hidden = activate(
            tape, tape.add_row_broadcast(tape.matmul(x, pvar("ffn.w1")), pvar("ffn.b1")),
            Activation::Tanh);
        const Var ffn_out =
            tape.add_row_broadcast(tape.matmul(hidden, pvar("ffn.w2")), pvar("ffn.b2"));
        x = tape.layer_norm(tape.add(x, ffn_out), pvar("ln2.g"), pvar("ln2.b"));
    }

    std::vector<Var> pooled;
    pooled.reserve(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
        pooled.push_back(tape.mean_rows(x, real_rows[static_cast<std::size_t>(b)]));
    }
    return tape.concat_rows(pooled);
}

Var score_candidates(Tape& tape, Var pooled, Var candidates) {
    return tape.matmul(pooled, candidates, /*transpose_b=*/true);
}

}  // namespace hrlp
