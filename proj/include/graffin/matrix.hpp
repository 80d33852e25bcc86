#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "graffin/error.hpp"

namespace graffin {

// Dense matrices are row-major float64 throughout.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool is_finite(const Mat& m) { return m.allFinite(); }

inline std::string shape_str(const Mat& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Compressed sparse row matrix, double valued. Used for adjacency operators
// and for constant feature matrices on the left of matmuls.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;  // size rows + 1
    std::vector<int> col_idx;  // size nnz
    std::vector<double> values;

    int nnz() const { return static_cast<int>(col_idx.size()); }

    double at(int i, int j) const {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col_idx[k] == j) return values[k];
        return 0.0;
    }

    // C = S * B
    Mat multiply(const Mat& B) const {
        if (B.rows() != cols)
            throw ContractError("csr multiply: " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " * " + shape_str(B));
        Mat C = Mat::Zero(rows, B.cols());
        for (int i = 0; i < rows; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                C.row(i) += values[k] * B.row(col_idx[k]);
        return C;
    }

    // C = S^T * B, via row-wise scatter (no transposed copy needed)
    Mat transpose_multiply(const Mat& B) const {
        if (B.rows() != rows)
            throw ContractError("csr transpose_multiply: " + std::to_string(cols) + "x" +
                                std::to_string(rows) + " * " + shape_str(B));
        Mat C = Mat::Zero(cols, B.cols());
        for (int i = 0; i < rows; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                C.row(col_idx[k]) += values[k] * B.row(i);
        return C;
    }

    Mat to_dense() const {
        Mat D = Mat::Zero(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) D(i, col_idx[k]) = values[k];
        return D;
    }

    static CsrMatrix from_dense(const Mat& X) {
        CsrMatrix s;
        s.rows = static_cast<int>(X.rows());
        s.cols = static_cast<int>(X.cols());
        s.row_ptr.assign(s.rows + 1, 0);
        for (int i = 0; i < s.rows; ++i) {
            for (int j = 0; j < s.cols; ++j) {
                if (X(i, j) != 0.0) {
                    s.col_idx.push_back(j);
                    s.values.push_back(X(i, j));
                }
            }
            s.row_ptr[i + 1] = static_cast<int>(s.col_idx.size());
        }
        return s;
    }

    // Triplets must not contain duplicates; they are sorted per row.
    static CsrMatrix from_triplets(int rows, int cols,
                                   std::vector<std::tuple<int, int, double>> triplets) {
        std::sort(triplets.begin(), triplets.end());
        CsrMatrix s;
        s.rows = rows;
        s.cols = cols;
        s.row_ptr.assign(rows + 1, 0);
        for (const auto& [i, j, v] : triplets) s.row_ptr[i + 1]++;
        for (int i = 0; i < rows; ++i) s.row_ptr[i + 1] += s.row_ptr[i];
        s.col_idx.reserve(triplets.size());
        s.values.reserve(triplets.size());
        for (const auto& [i, j, v] : triplets) {
            s.col_idx.push_back(j);
            s.values.push_back(v);
        }
        return s;
    }

    bool operator==(const CsrMatrix& o) const {
        return rows == o.rows && cols == o.cols && row_ptr == o.row_ptr &&
               col_idx == o.col_idx && values == o.values;
    }
};

}  // namespace graffin
