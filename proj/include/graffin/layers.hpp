#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "graffin/autodiff.hpp"
#include "graffin/graph.hpp"
#include "graffin/rng.hpp"

namespace graffin {

// Glorot-uniform weight matrix: entries uniform in +-sqrt(6/(fan_in+fan_out)),
// drawn row-major from the seeded stream.
inline Mat glorot_uniform(int rows, int cols, std::uint64_t seed) {
    const double a = std::sqrt(6.0 / (rows + cols));
    Rng rng(seed);
    Mat w(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-a, a);
    return w;
}

struct LinearParams {
    Tensor W;  // in x out
    Tensor b;  // 1 x out

    static LinearParams create(int in_dim, int out_dim, std::uint64_t seed) {
        LinearParams p;
        p.W = Tensor::leaf(glorot_uniform(in_dim, out_dim, seed), true);
        p.b = Tensor::leaf(Mat::Zero(1, out_dim), true);
        return p;
    }
};

// X W + b with the bias row-broadcast.
inline Tensor linear_forward(Tape& tape, const Tensor& X, const LinearParams& p) {
    return tape.add_rowvec(tape.matmul(X, p.W), p.b);
}

// Constant (sparse) input variant; gradient flows into W and b only.
inline Tensor linear_forward(Tape& tape, const CsrMatrix& X, const LinearParams& p) {
    return tape.add_rowvec(tape.spmm(X, p.W), p.b);
}

// Gated recurrent unit parameters. The update gate z blends the previous
// hidden state with the tanh candidate s; h0 is a learnable initial state.
struct GruParams {
    Tensor W_z, W_r, W_s;  // in x hidden
    Tensor U_z, U_r, U_s;  // hidden x hidden
    Tensor b_z, b_r, b_s;  // 1 x hidden
    Tensor h0;             // 1 x hidden

    static GruParams create(int in_dim, int hidden, std::uint64_t seed) {
        GruParams p;
        p.W_z = Tensor::leaf(glorot_uniform(in_dim, hidden, mix_seed(seed, 0)), true);
        p.W_r = Tensor::leaf(glorot_uniform(in_dim, hidden, mix_seed(seed, 1)), true);
        p.W_s = Tensor::leaf(glorot_uniform(in_dim, hidden, mix_seed(seed, 2)), true);
        p.U_z = Tensor::leaf(glorot_uniform(hidden, hidden, mix_seed(seed, 3)), true);
        p.U_r = Tensor::leaf(glorot_uniform(hidden, hidden, mix_seed(seed, 4)), true);
        p.U_s = Tensor::leaf(glorot_uniform(hidden, hidden, mix_seed(seed, 5)), true);
        p.b_z = Tensor::leaf(Mat::Zero(1, hidden), true);
        p.b_r = Tensor::leaf(Mat::Zero(1, hidden), true);
        p.b_s = Tensor::leaf(Mat::Zero(1, hidden), true);
        p.h0 = Tensor::leaf(Mat::Zero(1, hidden), true);
        return p;
    }

    int hidden() const { return U_z.cols(); }
};

// Runs the GRU over the rows of X_seq (already in sequence order):
//   z_t = sigmoid(x_t W_z + h_{t-1} U_z + b_z)
//   r_t = sigmoid(x_t W_r + h_{t-1} U_r + b_r)
//   s_t = tanh(x_t W_s + (h_{t-1} o r_t) U_s + b_s)
//   h_t = z_t o h_{t-1} + (1 - z_t) o s_t
// Output row t is h_t. Inherently sequential across positions.
inline Tensor gru_sequence(Tape& tape, const Tensor& X_seq, const GruParams& p) {
    if (X_seq.cols() != p.W_z.rows())
        throw ContractError("gru_sequence: input " + shape_str(X_seq.value()) + " vs W_z " +
                            shape_str(p.W_z.value()));
    const int n = X_seq.rows();
    std::vector<Tensor> hs;
    hs.reserve(static_cast<std::size_t>(n));
    Tensor h = p.h0;
    for (int t = 0; t < n; ++t) {
        Tensor x = tape.slice_row(X_seq, t);
        Tensor z = tape.sigmoid_(tape.add_rowvec(
            tape.add(tape.matmul(x, p.W_z), tape.matmul(h, p.U_z)), p.b_z));
        Tensor r = tape.sigmoid_(tape.add_rowvec(
            tape.add(tape.matmul(x, p.W_r), tape.matmul(h, p.U_r)), p.b_r));
        Tensor s = tape.tanh_(tape.add_rowvec(
            tape.add(tape.matmul(x, p.W_s), tape.matmul(tape.hadamard(h, r), p.U_s)), p.b_s));
        h = tape.add(tape.hadamard(z, h), tape.hadamard(tape.one_minus(z), s));
        hs.push_back(h);
    }
    return tape.concat_rows(hs);
}

enum class Aggregation { GcnNorm, Mean };

inline const char* aggregation_name(Aggregation a) {
    return a == Aggregation::GcnNorm ? "gcn" : "mean";
}

inline Aggregation aggregation_from_name(const std::string& name) {
    if (name == "gcn") return Aggregation::GcnNorm;
    if (name == "mean") return Aggregation::Mean;
    throw ConfigError("unknown aggregation '" + name + "' (expected gcn|mean)");
}

// Single message-passing layer weight.
struct MpParams {
    Tensor W;  // D x hidden
    Aggregation aggregation = Aggregation::GcnNorm;

    static MpParams create(int in_dim, int hidden, Aggregation aggr, std::uint64_t seed) {
        MpParams p;
        p.W = Tensor::leaf(glorot_uniform(in_dim, hidden, seed), true);
        p.aggregation = aggr;
        return p;
    }
};

inline CsrMatrix aggregation_matrix(const AttributedGraph& g, Aggregation aggr) {
    return aggr == Aggregation::GcnNorm ? normalized_adjacency(g) : mean_aggregation_adjacency(g);
}

// ReLU(Agg (X W)) with Agg and X constant. The sparse matrices must outlive
// the tape (see Tape::spmm).
inline Tensor mp_forward(Tape& tape, const CsrMatrix& agg, const CsrMatrix& X,
                         const MpParams& p) {
    return tape.relu(tape.spmm(agg, tape.spmm(X, p.W)));
}

}  // namespace graffin
