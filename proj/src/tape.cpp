#include "hrlp/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hrlp {

namespace {

// C (+)= op(A) * op(B)
void gemm_acc(const Matrix& a, bool ta, const Matrix& b, bool tb, Matrix& c) {
    const int m = ta ? a.cols : a.rows;
    const int k = ta ? a.rows : a.cols;
    const int n = tb ? b.rows : b.cols;
    if ((tb ? b.cols : b.rows) != k || c.rows != m || c.cols != n) {
        throw std::invalid_argument("gemm: shape mismatch");
    }
    for (int i = 0; i < m; ++i) {
        for (int kk = 0; kk < k; ++kk) {
            const double aik = ta ? a.at(kk, i) : a.at(i, kk);
            if (aik == 0.0) continue;
            if (!tb) {
                const double* brow = b.row(kk);
                double* crow = c.row(i);
                for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
            } else {
                double* crow = c.row(i);
                for (int j = 0; j < n; ++j) crow[j] += aik * b.at(j, kk);
            }
        }
    }
}

}  // namespace

Var Tape::push(Matrix value, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.grad = Matrix(n.value.rows, n.value.cols);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(const Matrix& value, Matrix* grad) {
    Var v = push(value);
    nodes_.back().external_grad = grad;
    return v;
}

Var Tape::constant(Matrix value) { return push(std::move(value)); }

Var Tape::matmul(Var a, Var b, bool transpose_b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    const int n = transpose_b ? vb.rows : vb.cols;
    Matrix out(va.rows, n);
    gemm_acc(va, false, vb, transpose_b, out);
    Var v = push(std::move(out), nullptr);
    nodes_.back().back = [this, a, b, v, transpose_b]() {
        const Matrix& g = grad_ref(v);
        // dA = G * op(B)^T
        gemm_acc(g, false, value(b), !transpose_b, grad_ref(a));
        // dB = A^T * G (or G^T * A when B is used transposed)
        if (!transpose_b) {
            gemm_acc(value(a), true, g, false, grad_ref(b));
        } else {
            gemm_acc(g, true, value(a), false, grad_ref(b));
        }
    };
    return v;
}

Var Tape::add(Var a, Var b) {
    Matrix out = value(a);
    const Matrix& vb = value(b);
    if (!out.same_shape(vb)) throw std::invalid_argument("add: shape mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += vb.data[i];
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, b, v]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        Matrix& gb = grad_ref(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    };
    return v;
}

Var Tape::sub(Var a, Var b) {
    Matrix out = value(a);
    const Matrix& vb = value(b);
    if (!out.same_shape(vb)) throw std::invalid_argument("sub: shape mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= vb.data[i];
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, b, v]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        Matrix& gb = grad_ref(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    };
    return v;
}

Var Tape::hadamard(Var a, Var b) {
    Matrix out = value(a);
    const Matrix& vb = value(b);
    if (!out.same_shape(vb)) throw std::invalid_argument("hadamard: shape mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= vb.data[i];
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, b, v]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        Matrix& gb = grad_ref(b);
        const Matrix& va = value(a);
        const Matrix& vb2 = value(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i] * vb2.data[i];
            gb.data[i] += g.data[i] * va.data[i];
        }
    };
    return v;
}

Var Tape::scale(Var a, double c) {
    Matrix out = value(a);
    for (double& x : out.data) x *= c;
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, c]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
    };
    return v;
}

Var Tape::add_row_broadcast(Var a, Var bias) {
    Matrix out = value(a);
    const Matrix& vb = value(bias);
    if (vb.rows != 1 || vb.cols != out.cols) throw std::invalid_argument("bias shape mismatch");
    for (int r = 0; r < out.rows; ++r) {
        double* row = out.row(r);
        for (int c = 0; c < out.cols; ++c) row[c] += vb.at(0, c);
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, bias, v]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        Matrix& gb = grad_ref(bias);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
        for (int r = 0; r < g.rows; ++r) {
            const double* row = g.row(r);
            for (int c = 0; c < g.cols; ++c) gb.at(0, c) += row[c];
        }
    };
    return v;
}

Var Tape::row_scale(Var a, std::vector<double> f) {
    Matrix out = value(a);
    if (static_cast<int>(f.size()) != out.rows) throw std::invalid_argument("row_scale size");
    for (int r = 0; r < out.rows; ++r) {
        double* row = out.row(r);
        for (int c = 0; c < out.cols; ++c) row[c] *= f[static_cast<std::size_t>(r)];
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, f = std::move(f)]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (int r = 0; r < g.rows; ++r) {
            const double* row = g.row(r);
            double* grow = ga.row(r);
            for (int c = 0; c < g.cols; ++c) grow[c] += row[c] * f[static_cast<std::size_t>(r)];
        }
    };
    return v;
}

Var Tape::tanh_act(Var a) {
    Matrix out = value(a);
    for (double& x : out.data) x = std::tanh(x);
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v]() {
        const Matrix& g = grad_ref(v);
        const Matrix& y = value(v);
        Matrix& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
        }
    };
    return v;
}

Var Tape::relu(Var a) {
    Matrix out = value(a);
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v]() {
        const Matrix& g = grad_ref(v);
        const Matrix& x = value(a);
        Matrix& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x.data[i] > 0.0) ga.data[i] += g.data[i];
        }
    };
    return v;
}

Var Tape::sigmoid(Var a) {
    Matrix out = value(a);
    for (double& x : out.data) x = 1.0 / (1.0 + std::exp(-x));
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v]() {
        const Matrix& g = grad_ref(v);
        const Matrix& y = value(v);
        Matrix& ga = grad_ref(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
        }
    };
    return v;
}

Var Tape::transpose(Var a) {
    const Matrix& va = value(a);
    Matrix out(va.cols, va.rows);
    for (int r = 0; r < va.rows; ++r) {
        for (int c = 0; c < va.cols; ++c) out.at(c, r) = va.at(r, c);
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < g.cols; ++c) ga.at(c, r) += g.at(r, c);
        }
    };
    return v;
}

Var Tape::gather_rows(Var a, std::vector<int> rows) {
    const Matrix& va = value(a);
    Matrix out(static_cast<int>(rows.size()), va.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = va.row(rows[i]);
        double* dst = out.row(static_cast<int>(i));
        for (int c = 0; c < va.cols; ++c) dst[c] = src[c];
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, rows = std::move(rows)]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double* src = g.row(static_cast<int>(i));
            double* dst = ga.row(rows[i]);
            for (int c = 0; c < g.cols; ++c) dst[c] += src[c];
        }
    };
    return v;
}

Var Tape::select_rows(const std::vector<std::pair<Var, int>>& picks) {
    if (picks.empty()) throw std::invalid_argument("select_rows: empty");
    const int cols = value(picks.front().first).cols;
    Matrix out(static_cast<int>(picks.size()), cols);
    for (std::size_t i = 0; i < picks.size(); ++i) {
        const Matrix& src = value(picks[i].first);
        if (src.cols != cols) throw std::invalid_argument("select_rows: width mismatch");
        const double* s = src.row(picks[i].second);
        double* d = out.row(static_cast<int>(i));
        for (int c = 0; c < cols; ++c) d[c] = s[c];
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, v, picks]() {
        const Matrix& g = grad_ref(v);
        for (std::size_t i = 0; i < picks.size(); ++i) {
            Matrix& ga = grad_ref(picks[i].first);
            const double* s = g.row(static_cast<int>(i));
            double* d = ga.row(picks[i].second);
            for (int c = 0; c < g.cols; ++c) d[c] += s[c];
        }
    };
    return v;
}

Var Tape::slice_rows(Var a, int r0, int count) {
    const Matrix& va = value(a);
    Matrix out(count, va.cols);
    for (int r = 0; r < count; ++r) {
        const double* s = va.row(r0 + r);
        double* d = out.row(r);
        for (int c = 0; c < va.cols; ++c) d[c] = s[c];
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, r0, count]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (int r = 0; r < count; ++r) {
            const double* s = g.row(r);
            double* d = ga.row(r0 + r);
            for (int c = 0; c < g.cols; ++c) d[c] += s[c];
        }
    };
    return v;
}

Var Tape::slice_cols(Var a, int c0, int count) {
    const Matrix& va = value(a);
    Matrix out(va.rows, count);
    for (int r = 0; r < va.rows; ++r) {
        for (int c = 0; c < count; ++c) out.at(r, c) = va.at(r, c0 + c);
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, c0, count]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < count; ++c) ga.at(r, c0 + c) += g.at(r, c);
        }
    };
    return v;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
    const int cols = value(parts.front()).cols;
    int rows = 0;
    for (Var p : parts) {
        if (value(p).cols != cols) throw std::invalid_argument("concat_rows: width mismatch");
        rows += value(p).rows;
    }
    Matrix out(rows, cols);
    int r = 0;
    for (Var p : parts) {
        const Matrix& src = value(p);
        for (int i = 0; i < src.rows; ++i, ++r) {
            const double* s = src.row(i);
            double* d = out.row(r);
            for (int c = 0; c < cols; ++c) d[c] = s[c];
        }
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, v, parts]() {
        const Matrix& g = grad_ref(v);
        int r2 = 0;
        for (Var p : parts) {
            Matrix& gp = grad_ref(p);
            for (int i = 0; i < gp.rows; ++i, ++r2) {
                const double* s = g.row(r2);
                double* d = gp.row(i);
                for (int c = 0; c < g.cols; ++c) d[c] += s[c];
            }
        }
    };
    return v;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    const int rows = value(parts.front()).rows;
    int cols = 0;
    for (Var p : parts) {
        if (value(p).rows != rows) throw std::invalid_argument("concat_cols: height mismatch");
        cols += value(p).cols;
    }
    Matrix out(rows, cols);
    int c0 = 0;
    for (Var p : parts) {
        const Matrix& src = value(p);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < src.cols; ++c) out.at(r, c0 + c) = src.at(r, c);
        }
        c0 += src.cols;
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, v, parts]() {
        const Matrix& g = grad_ref(v);
        int c1 = 0;
        for (Var p : parts) {
            Matrix& gp = grad_ref(p);
            for (int r = 0; r < g.rows; ++r) {
                for (int c = 0; c < gp.cols; ++c) gp.at(r, c) += g.at(r, c1 + c);
            }
            c1 += gp.cols;
        }
    };
    return v;
}

Var Tape::segment_sum(Var a, std::vector<int> seg, int n_segments) {
    const Matrix& va = value(a);
    if (static_cast<int>(seg.size()) != va.rows) throw std::invalid_argument("segment_sum size");
    Matrix out(n_segments, va.cols);
    for (int r = 0; r < va.rows; ++r) {
        const int s = seg[static_cast<std::size_t>(r)];
        if (s < 0) continue;
        const double* src = va.row(r);
        double* dst = out.row(s);
        for (int c = 0; c < va.cols; ++c) dst[c] += src[c];
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, seg = std::move(seg)]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (int r = 0; r < ga.rows; ++r) {
            const int s = seg[static_cast<std::size_t>(r)];
            if (s < 0) continue;
            const double* src = g.row(s);
            double* dst = ga.row(r);
            for (int c = 0; c < g.cols; ++c) dst[c] += src[c];
        }
    };
    return v;
}

Var Tape::masked_softmax_rows(Var a, Matrix mask) {
    const Matrix& va = value(a);
    if (!va.same_shape(mask)) throw std::invalid_argument("masked_softmax: mask shape");
    Matrix out(va.rows, va.cols);
    for (int r = 0; r < va.rows; ++r) {
        double mx = -1e300;
        for (int c = 0; c < va.cols; ++c) {
            if (mask.at(r, c) != 0.0) mx = std::max(mx, va.at(r, c));
        }
        double denom = 0.0;
        for (int c = 0; c < va.cols; ++c) {
            if (mask.at(r, c) != 0.0) denom += std::exp(va.at(r, c) - mx);
        }
        for (int c = 0; c < va.cols; ++c) {
            if (mask.at(r, c) != 0.0) out.at(r, c) = std::exp(va.at(r, c) - mx) / denom;
        }
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, mask = std::move(mask)]() {
        const Matrix& g = grad_ref(v);
        const Matrix& y = value(v);
        Matrix& ga = grad_ref(a);
        for (int r = 0; r < g.rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < g.cols; ++c) {
                if (mask.at(r, c) != 0.0) dot += g.at(r, c) * y.at(r, c);
            }
            for (int c = 0; c < g.cols; ++c) {
                if (mask.at(r, c) != 0.0) ga.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
            }
        }
    };
    return v;
}

Var Tape::mean_rows(Var a, std::vector<int> rows) {
    if (rows.empty()) throw std::invalid_argument("mean_rows: empty row set");
    const Matrix& va = value(a);
    Matrix out(1, va.cols);
    for (int r : rows) {
        const double* s = va.row(r);
        for (int c = 0; c < va.cols; ++c) out.at(0, c) += s[c];
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& x : out.data) x *= inv;
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v, rows = std::move(rows), inv]() {
        const Matrix& g = grad_ref(v);
        Matrix& ga = grad_ref(a);
        for (int r : rows) {
            double* d = ga.row(r);
            for (int c = 0; c < g.cols; ++c) d[c] += g.at(0, c) * inv;
        }
    };
    return v;
}

Var Tape::layer_norm(Var a, Var gain, Var bias, double eps) {
    const Matrix& va = value(a);
    const Matrix& vg = value(gain);
    const Matrix& vb = value(bias);
    if (vg.rows != 1 || vg.cols != va.cols || vb.rows != 1 || vb.cols != va.cols) {
        throw std::invalid_argument("layer_norm: gain/bias shape");
    }
    const int n = va.cols;
    Matrix out(va.rows, n);
    Matrix xhat(va.rows, n);
    std::vector<double> inv_sigma(static_cast<std::size_t>(va.rows));
    for (int r = 0; r < va.rows; ++r) {
        const double* x = va.row(r);
        double mu = 0.0;
        for (int c = 0; c < n; ++c) mu += x[c];
        mu /= n;
        double var = 0.0;
        for (int c = 0; c < n; ++c) var += (x[c] - mu) * (x[c] - mu);
        var /= n;
        const double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[static_cast<std::size_t>(r)] = is;
        for (int c = 0; c < n; ++c) {
            xhat.at(r, c) = (x[c] - mu) * is;
            out.at(r, c) = xhat.at(r, c) * vg.at(0, c) + vb.at(0, c);
        }
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, gain, bias, v, xhat = std::move(xhat),
                          inv_sigma = std::move(inv_sigma)]() {
        const Matrix& g = grad_ref(v);
        const Matrix& vg2 = value(gain);
        Matrix& ga = grad_ref(a);
        Matrix& gg = grad_ref(gain);
        Matrix& gb = grad_ref(bias);
        const int n2 = g.cols;
        for (int r = 0; r < g.rows; ++r) {
            double mean_gy = 0.0;
            double mean_gy_xhat = 0.0;
            for (int c = 0; c < n2; ++c) {
                const double gy = g.at(r, c) * vg2.at(0, c);
                mean_gy += gy;
                mean_gy_xhat += gy * xhat.at(r, c);
            }
            mean_gy /= n2;
            mean_gy_xhat /= n2;
            const double is = inv_sigma[static_cast<std::size_t>(r)];
            for (int c = 0; c < n2; ++c) {
                const double gy = g.at(r, c) * vg2.at(0, c);
                ga.at(r, c) += is * (gy - mean_gy - xhat.at(r, c) * mean_gy_xhat);
                gg.at(0, c) += g.at(r, c) * xhat.at(r, c);
                gb.at(0, c) += g.at(r, c);
            }
        }
    };
    return v;
}

Var Tape::rowwise_dot(Var a, Var b) {
    const Matrix& va = value(a);
    const Matrix& vb = value(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("rowwise_dot: shape mismatch");
    Matrix out(va.rows, 1);
    for (int r = 0; r < va.rows; ++r) {
        const double* x = va.row(r);
        const double* y = vb.row(r);
        double s = 0.0;
        for (int c = 0; c < va.cols; ++c) s += x[c] * y[c];
        out.at(r, 0) = s;
    }
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, b, v]() {
        const Matrix& g = grad_ref(v);
        const Matrix& va2 = value(a);
        const Matrix& vb2 = value(b);
        Matrix& ga = grad_ref(a);
        Matrix& gb = grad_ref(b);
        for (int r = 0; r < va2.rows; ++r) {
            const double gr = g.at(r, 0);
            for (int c = 0; c < va2.cols; ++c) {
                ga.at(r, c) += gr * vb2.at(r, c);
                gb.at(r, c) += gr * va2.at(r, c);
            }
        }
    };
    return v;
}

Var Tape::sum(Var a) {
    const Matrix& va = value(a);
    Matrix out(1, 1);
    for (double x : va.data) out.at(0, 0) += x;
    Var v = push(std::move(out));
    nodes_.back().back = [this, a, v]() {
        const double g = grad_ref(v).at(0, 0);
        Matrix& ga = grad_ref(a);
        for (double& x : ga.data) x += g;
    };
    return v;
}

Var Tape::bce_with_logits(Var scores, Matrix labels) {
    const Matrix& x = value(scores);
    if (!x.same_shape(labels)) throw std::invalid_argument("bce: label shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(x.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x.data[i];
        const double li = labels.data[i];
        loss += std::max(xi, 0.0) - xi * li + std::log1p(std::exp(-std::abs(xi)));
    }
    Matrix out(1, 1);
    out.at(0, 0) = loss * inv_n;
    Var v = push(std::move(out));
    nodes_.back().back = [this, scores, v, labels = std::move(labels), inv_n]() {
        const double g = grad_ref(v).at(0, 0);
        const Matrix& x2 = value(scores);
        Matrix& gs = grad_ref(scores);
        for (std::size_t i = 0; i < x2.size(); ++i) {
            const double sig = 1.0 / (1.0 + std::exp(-x2.data[i]));
            gs.data[i] += g * inv_n * (sig - labels.data[i]);
        }
    };
    return v;
}

Var Tape::margin_ranking(Var pos, Var neg, double margin) {
    const Matrix& p = value(pos);
    const Matrix& n = value(neg);
    if (!p.same_shape(n) || p.cols != 1) throw std::invalid_argument("margin_ranking: shape");
    const double inv_n = 1.0 / static_cast<double>(p.rows);
    double loss = 0.0;
    for (int r = 0; r < p.rows; ++r) {
        loss += std::max(0.0, margin + n.at(r, 0) - p.at(r, 0));
    }
    Matrix out(1, 1);
    out.at(0, 0) = loss * inv_n;
    Var v = push(std::move(out));
    nodes_.back().back = [this, pos, neg, v, margin, inv_n]() {
        const double g = grad_ref(v).at(0, 0);
        const Matrix& p2 = value(pos);
        const Matrix& n2 = value(neg);
        Matrix& gp = grad_ref(pos);
        Matrix& gn = grad_ref(neg);
        for (int r = 0; r < p2.rows; ++r) {
            if (margin + n2.at(r, 0) - p2.at(r, 0) > 0.0) {
                gp.at(r, 0) -= g * inv_n;
                gn.at(r, 0) += g * inv_n;
            }
        }
    };
    return v;
}

void Tape::backward(Var scalar_loss) {
    Matrix& g = grad_ref(scalar_loss);
    if (g.rows != 1 || g.cols != 1) throw std::invalid_argument("backward: loss must be scalar");
    g.at(0, 0) = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->back) it->back();
        if (it->external_grad) {
            Matrix& eg = *it->external_grad;
            for (std::size_t i = 0; i < eg.size(); ++i) eg.data[i] += it->grad.data[i];
        }
    }
}

}  // namespace hrlp
