#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hrlp/features.hpp"
#include "hrlp/kg.hpp"
#include "hrlp/matrix.hpp"
#include "hrlp/tape.hpp"

namespace hrlp {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EncoderKind { Linear, Stare };
enum class ComposeOp { Multiply, Subtract };
enum class Activation { Tanh, Identity, Relu };
enum class QualifierAggregation { Sum, Attention };

struct ModelConfig {
    EncoderKind encoder = EncoderKind::Linear;
    int feature_dim = 16;  // d_f
    int d_r = 64;
    int qp_slots = 2;  // qualifier pairs per linearized statement: 0, 2, 4, 6
    int stare_layers = 2;
    double alpha = 0.8;  // qualifier infusion weight
    ComposeOp compose = ComposeOp::Multiply;
    Activation activation = Activation::Tanh;
    bool degree_norm = true;
    QualifierAggregation qual_aggr = QualifierAggregation::Sum;
    int tf_layers = 2;
    int heads = 2;
    int ffn_hidden = 128;

    void validate() const;
};

struct Tensor {
    std::string name;
    Matrix value;
    Matrix grad;
};

// All learnable state: relation table, linear encoder, StarE stack,
// Transformer decoder, PAD and position embeddings.
struct ModelParams {
    ModelConfig cfg;
    int num_relations = 0;  // base relation count (table holds 2R+1 rows)
    std::vector<Tensor> tensors;
    std::unordered_map<std::string, int> index;

    static ModelParams init(const ModelConfig& cfg, int num_relations, std::uint64_t seed);

    Tensor& t(const std::string& name);
    const Tensor& t(const std::string& name) const;
    bool has(const std::string& name) const { return index.count(name) > 0; }

    int relation_row(RelationId r) const { return r; }
    int inverse_row(RelationId r) const { return num_relations + r; }
    int loop_row() const { return 2 * num_relations; }

    void zero_grads();
    // Throws NumericError naming the first offending tensor.
    void check_finite(const std::string& when) const;
};

void save_checkpoint(const std::string& path_prefix, const ModelParams& params,
                     const std::string& extra_manifest_json = "{}");
ModelParams load_checkpoint(const std::string& path_prefix);

// A (h, r, q) query whose target entity is scored 1-N. For head prediction
// use the tail as `head` and the inverse relation row.
struct ScoreQuery {
    EntityId head{};
    int rel_row{};
    const std::vector<QualifierPair>* qualifiers = nullptr;
};

struct EncodedGraph {
    Var entities;   // E x d_r
    Var relations;  // (2R+1) x d_r
};

// Linear feature projection; StarE message passing on top when configured.
// compgcn_mode runs the StarE stack with the qualifier machinery removed.
EncodedGraph encode_graph(Tape& tape, ModelParams& params, const StatementGraph& graph,
                          const FeatureTable& features, bool compgcn_mode = false);

// Plain linear projection of features (no graph structure).
Var linear_encode(Tape& tape, ModelParams& params, const FeatureTable& features);

// Linearize + Transformer + masked mean pooling. Returns B x d_r.
Var decode_pool(Tape& tape, ModelParams& params, const EncodedGraph& enc,
                const std::vector<ScoreQuery>& queries);

// pooled (B x d) against candidate vectors (N x d) -> scores (B x N).
Var score_candidates(Tape& tape, Var pooled, Var candidates);

}  // namespace hrlp
