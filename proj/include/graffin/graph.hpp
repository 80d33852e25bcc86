#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "graffin/error.hpp"
#include "graffin/matrix.hpp"

namespace graffin {

// Undirected attributed graph. The adjacency is symmetric 0/1 in CSR form
// and stores no self-loops; normalized_adjacency adds them transiently.
struct AttributedGraph {
    int num_nodes = 0;
    int num_features = 0;
    int num_classes = 0;
    CsrMatrix adjacency;
    Mat features;             // N x D
    std::vector<int> labels;  // length N, values in [0, K)

    int degree(int v) const { return adjacency.row_ptr[v + 1] - adjacency.row_ptr[v]; }
    long num_edges() const { return adjacency.nnz() / 2; }
};

struct ClassStats {
    std::vector<long> counts;  // length K
    int head_class = 0;        // max count, ties -> smallest id
    int tail_class = 0;        // min count, ties -> smallest id
    double r_imb = 1.0;        // counts[head] / counts[tail], >= 1
};

// Builds a graph from an edge list: symmetrizes, deduplicates, drops
// self-loops. num_classes < 0 infers K = max(label) + 1.
inline AttributedGraph build_graph(const std::vector<std::pair<int, int>>& edges, Mat features,
                                   std::vector<int> labels, int num_classes = -1) {
    const int n = static_cast<int>(labels.size());
    if (features.rows() != n)
        throw InputError("build_graph: " + std::to_string(features.rows()) +
                         " feature rows for " + std::to_string(n) + " labels");
    if (!is_finite(features)) throw InputError("build_graph: non-finite feature entry");

    int k = num_classes;
    if (k < 0) {
        k = 0;
        for (int y : labels) k = std::max(k, y + 1);
    }
    std::vector<long> counts(static_cast<std::size_t>(std::max(k, 1)), 0);
    for (int y : labels) {
        if (y < 0 || y >= k)
            throw InputError("build_graph: label " + std::to_string(y) + " outside [0, " +
                             std::to_string(k) + ")");
        counts[y]++;
    }
    for (int c = 0; c < k; ++c)
        if (n > 0 && counts[c] == 0)
            throw InputError("build_graph: class " + std::to_string(c) + " has no nodes");

    std::vector<std::pair<int, int>> sym;
    sym.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw InputError("build_graph: edge (" + std::to_string(u) + ", " +
                             std::to_string(v) + ") references a node outside [0, " +
                             std::to_string(n) + ")");
        if (u == v) continue;  // self-loops are not stored
        sym.emplace_back(u, v);
        sym.emplace_back(v, u);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

    AttributedGraph g;
    g.num_nodes = n;
    g.num_features = static_cast<int>(features.cols());
    g.num_classes = k;
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.adjacency.rows = n;
    g.adjacency.cols = n;
    g.adjacency.row_ptr.assign(n + 1, 0);
    for (const auto& [u, v] : sym) g.adjacency.row_ptr[u + 1]++;
    for (int i = 0; i < n; ++i) g.adjacency.row_ptr[i + 1] += g.adjacency.row_ptr[i];
    g.adjacency.col_idx.reserve(sym.size());
    g.adjacency.values.assign(sym.size(), 1.0);
    for (const auto& [u, v] : sym) g.adjacency.col_idx.push_back(v);
    return g;
}

inline ClassStats class_stats(const AttributedGraph& g) {
    ClassStats s;
    s.counts.assign(static_cast<std::size_t>(g.num_classes), 0);
    for (int y : g.labels) s.counts[y]++;
    s.head_class = 0;
    s.tail_class = 0;
    for (int c = 1; c < g.num_classes; ++c) {
        if (s.counts[c] > s.counts[s.head_class]) s.head_class = c;
        if (s.counts[c] < s.counts[s.tail_class]) s.tail_class = c;
    }
    s.r_imb = static_cast<double>(s.counts[s.head_class]) /
              static_cast<double>(s.counts[s.tail_class]);
    return s;
}

inline std::vector<int> degrees(const AttributedGraph& g) {
    std::vector<int> d(static_cast<std::size_t>(g.num_nodes));
    for (int v = 0; v < g.num_nodes; ++v) d[v] = g.degree(v);
    return d;
}

// GCN operator: A_hat = D~^{-1/2} (A + I) D~^{-1/2} with D~ the degree
// matrix of A + I. Isolated nodes get A_hat[i,i] = 1.
inline CsrMatrix normalized_adjacency(const AttributedGraph& g) {
    const int n = g.num_nodes;
    std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(g.degree(v) + 1.0);

    std::vector<std::tuple<int, int, double>> triplets;
    triplets.reserve(g.adjacency.nnz() + n);
    for (int i = 0; i < n; ++i) {
        triplets.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
        for (int k = g.adjacency.row_ptr[i]; k < g.adjacency.row_ptr[i + 1]; ++k) {
            const int j = g.adjacency.col_idx[k];
            triplets.emplace_back(i, j, inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    return CsrMatrix::from_triplets(n, n, std::move(triplets));
}

// Row i holds 1/|N(i)| at each neighbor column; isolated nodes get a zero row.
inline CsrMatrix mean_aggregation_adjacency(const AttributedGraph& g) {
    const int n = g.num_nodes;
    std::vector<std::tuple<int, int, double>> triplets;
    triplets.reserve(g.adjacency.nnz());
    for (int i = 0; i < n; ++i) {
        const int deg = g.degree(i);
        if (deg == 0) continue;
        const double w = 1.0 / deg;
        for (int k = g.adjacency.row_ptr[i]; k < g.adjacency.row_ptr[i + 1]; ++k)
            triplets.emplace_back(i, g.adjacency.col_idx[k], w);
    }
    return CsrMatrix::from_triplets(n, n, std::move(triplets));
}

}  // namespace graffin
