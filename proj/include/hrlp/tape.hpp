#pragma once

#include <functional>
#include <vector>

#include "hrlp/matrix.hpp"

namespace hrlp {

struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

// Reverse-mode autodiff tape over dense double matrices. Single-threaded;
// node evaluation order is creation order, backward runs in reverse, so
// results are bit-reproducible for a fixed op sequence.
class Tape {
public:
    // Leaf bound to external storage; backward accumulates into *grad.
    Var param(const Matrix& value, Matrix* grad);
    Var constant(Matrix value);

    Var matmul(Var a, Var b, bool transpose_b = false);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var scale(Var a, double c);
    Var add_row_broadcast(Var a, Var bias);           // bias: 1 x C
    Var row_scale(Var a, std::vector<double> f);      // constant per-row factors
    Var tanh_act(Var a);
    Var relu(Var a);
    Var sigmoid(Var a);
    Var transpose(Var a);

    Var gather_rows(Var a, std::vector<int> rows);
    // Arbitrary rows from multiple sources (all with equal width).
    Var select_rows(const std::vector<std::pair<Var, int>>& picks);
    Var slice_rows(Var a, int r0, int count);
    Var slice_cols(Var a, int c0, int count);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    // out[seg[i]] += a[i]; rows with seg[i] < 0 are dropped.
    Var segment_sum(Var a, std::vector<int> seg, int n_segments);

    // Row-wise softmax over columns where mask != 0; masked entries are 0.
    Var masked_softmax_rows(Var a, Matrix mask);
    Var mean_rows(Var a, std::vector<int> rows);  // 1 x C
    Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);
    Var rowwise_dot(Var a, Var b);  // N x 1

    Var sum(Var a);  // 1 x 1
    // Mean binary cross entropy over all entries, numerically stable;
    // labels are already smoothed.
    Var bce_with_logits(Var scores, Matrix labels);
    // mean(max(0, margin + neg - pos)), pos/neg N x 1.
    Var margin_ranking(Var pos, Var neg, double margin);

    const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)].value; }
    const Matrix& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)].grad; }

    void backward(Var scalar_loss);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        Matrix* external_grad = nullptr;
        std::function<void()> back;  // pulls from this node's grad into parents
    };

    Var push(Matrix value, std::function<void()> back = nullptr);
    Matrix& grad_ref(Var v) { return nodes_[static_cast<std::size_t>(v.idx)].grad; }

    std::vector<Node> nodes_;
};

}  // namespace hrlp
