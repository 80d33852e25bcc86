#pragma once

// Reverse-mode automatic differentiation over dense matrices. A Tape records
// one closure per operation in execution order; backward replays them in
// exact reverse order, accumulating into the grad buffers of every tensor
// that requires gradients. Tensors are shared handles, so parameters outlive
// the tapes that use them and keep their gradients across tape lifetimes
// until explicitly zeroed (the optimizer zeroes them after each step).

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "graffin/error.hpp"
#include "graffin/matrix.hpp"

namespace graffin {

class Tape;

struct TensorData {
    Mat value;
    Mat grad;  // allocated lazily on first accumulation
    bool requires_grad = false;
    const Tape* producer = nullptr;
    std::uint64_t producer_epoch = 0;

    void ensure_grad() {
        if (grad.rows() != value.rows() || grad.cols() != value.cols())
            grad = Mat::Zero(value.rows(), value.cols());
    }
};

class Tensor {
public:
    Tensor() = default;

    static Tensor leaf(Mat value, bool requires_grad = false) {
        Tensor t;
        t.d_ = std::make_shared<TensorData>();
        t.d_->value = std::move(value);
        t.d_->requires_grad = requires_grad;
        if (requires_grad) t.d_->ensure_grad();
        return t;
    }

    static Tensor scalar(double v, bool requires_grad = false) {
        Mat m(1, 1);
        m(0, 0) = v;
        return leaf(std::move(m), requires_grad);
    }

    bool valid() const { return static_cast<bool>(d_); }
    int rows() const { return static_cast<int>(d_->value.rows()); }
    int cols() const { return static_cast<int>(d_->value.cols()); }

    const Mat& value() const { return d_->value; }
    Mat& value() { return d_->value; }
    double item() const {
        if (rows() != 1 || cols() != 1)
            throw ContractError("item: tensor is " + shape_str(d_->value) + ", not 1x1");
        return d_->value(0, 0);
    }

    bool requires_grad() const { return d_->requires_grad; }

    Mat& grad() {
        d_->ensure_grad();
        return d_->grad;
    }
    Mat grad_or_zero() const {
        if (d_->grad.rows() == d_->value.rows() && d_->grad.cols() == d_->value.cols())
            return d_->grad;
        return Mat::Zero(d_->value.rows(), d_->value.cols());
    }
    void zero_grad() {
        d_->ensure_grad();
        d_->grad.setZero();
    }

private:
    std::shared_ptr<TensorData> d_;
    friend class Tape;
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    std::size_t size() const { return ops_.size(); }

    // C = A * B
    Tensor matmul(const Tensor& a, const Tensor& b) {
        if (a.cols() != b.rows())
            throw ContractError("matmul: " + shape_str(a.value()) + " * " + shape_str(b.value()));
        Tensor out = make(a.value() * b.value(), a.requires_grad() || b.requires_grad());
        if (out.requires_grad())
            record([a, b, out]() {
                if (a.requires_grad()) a.d_->grad.noalias() += out.d_->grad * b.value().transpose();
                if (b.requires_grad()) b.d_->grad.noalias() += a.value().transpose() * out.d_->grad;
            });
        return out;
    }

    // C = S * B with S a constant sparse matrix; no gradient flows into S.
    // S must outlive the tape.
    Tensor spmm(const CsrMatrix& s, const Tensor& b) {
        Tensor out = make(s.multiply(b.value()), b.requires_grad());
        if (out.requires_grad()) {
            const CsrMatrix* sp = &s;
            record([sp, b, out]() { b.d_->grad += sp->transpose_multiply(out.d_->grad); });
        }
        return out;
    }

    Tensor add(const Tensor& a, const Tensor& b) {
        if (a.rows() != b.rows() || a.cols() != b.cols())
            throw ContractError("add: " + shape_str(a.value()) + " + " + shape_str(b.value()));
        Tensor out = make(a.value() + b.value(), a.requires_grad() || b.requires_grad());
        if (out.requires_grad())
            record([a, b, out]() {
                if (a.requires_grad()) a.d_->grad += out.d_->grad;
                if (b.requires_grad()) b.d_->grad += out.d_->grad;
            });
        return out;
    }

    // A + bias with bias a 1 x C row broadcast over the rows of A.
    Tensor add_rowvec(const Tensor& a, const Tensor& bias) {
        if (bias.rows() != 1 || bias.cols() != a.cols())
            throw ContractError("add_rowvec: " + shape_str(a.value()) + " + " +
                                shape_str(bias.value()));
        Tensor out = make(a.value().rowwise() + bias.value().row(0),
                          a.requires_grad() || bias.requires_grad());
        if (out.requires_grad())
            record([a, bias, out]() {
                if (a.requires_grad()) a.d_->grad += out.d_->grad;
                if (bias.requires_grad()) bias.d_->grad += out.d_->grad.colwise().sum();
            });
        return out;
    }

    Tensor hadamard(const Tensor& a, const Tensor& b) {
        if (a.rows() != b.rows() || a.cols() != b.cols())
            throw ContractError("hadamard: " + shape_str(a.value()) + " o " +
                                shape_str(b.value()));
        Tensor out =
            make(a.value().cwiseProduct(b.value()), a.requires_grad() || b.requires_grad());
        if (out.requires_grad())
            record([a, b, out]() {
                if (a.requires_grad()) a.d_->grad += out.d_->grad.cwiseProduct(b.value());
                if (b.requires_grad()) b.d_->grad += out.d_->grad.cwiseProduct(a.value());
            });
        return out;
    }

    Tensor relu(const Tensor& a) {
        Tensor out = make(a.value().cwiseMax(0.0), a.requires_grad());
        if (out.requires_grad())
            record([a, out]() {
                a.d_->grad.array() +=
                    out.d_->grad.array() * (a.value().array() > 0.0).cast<double>();
            });
        return out;
    }

    // tanh-approximation GeLU: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
    Tensor gelu(const Tensor& a) {
        static constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
        static constexpr double kA = 0.044715;
        const auto& x = a.value().array();
        Mat t = (kC * (x + kA * x.cube())).tanh().matrix();
        Tensor out = make((0.5 * x * (1.0 + t.array())).matrix(), a.requires_grad());
        if (out.requires_grad())
            record([a, out, t = std::move(t)]() {
                const auto& x = a.value().array();
                const auto& th = t.array();
                a.d_->grad.array() +=
                    out.d_->grad.array() *
                    (0.5 * (1.0 + th) +
                     0.5 * x * (1.0 - th.square()) * kC * (1.0 + 3.0 * kA * x.square()));
            });
        return out;
    }

    Tensor tanh_(const Tensor& a) {
        Tensor out = make(a.value().array().tanh().matrix(), a.requires_grad());
        if (out.requires_grad())
            record([a, out]() {
                a.d_->grad.array() +=
                    out.d_->grad.array() * (1.0 - out.value().array().square());
            });
        return out;
    }

    Tensor sigmoid_(const Tensor& a) {
        Tensor out =
            make((1.0 + (-a.value().array()).exp()).inverse().matrix(), a.requires_grad());
        if (out.requires_grad())
            record([a, out]() {
                const auto& y = out.value().array();
                a.d_->grad.array() += out.d_->grad.array() * y * (1.0 - y);
            });
        return out;
    }

    Tensor one_minus(const Tensor& a) {
        Tensor out = make((1.0 - a.value().array()).matrix(), a.requires_grad());
        if (out.requires_grad())
            record([a, out]() { a.d_->grad -= out.d_->grad; });
        return out;
    }

    Tensor scale(const Tensor& a, double c) {
        Tensor out = make(c * a.value(), a.requires_grad());
        if (out.requires_grad())
            record([a, out, c]() { a.d_->grad += c * out.d_->grad; });
        return out;
    }

    // Per-row y = x / max(rms(x), eps): rows with RMS above eps come out with
    // unit root-mean-square; tiny rows are scaled by 1/eps (zero rows stay
    // zero).
    Tensor rms_norm_rows(const Tensor& a, double eps = 1e-8) {
        const int n = a.rows(), d = a.cols();
        Eigen::VectorXd s(n);
        Mat y(n, d);
        for (int i = 0; i < n; ++i) {
            s(i) = std::max(std::sqrt(a.value().row(i).squaredNorm() / d), eps);
            y.row(i) = a.value().row(i) / s(i);
        }
        Tensor out = make(std::move(y), a.requires_grad());
        if (out.requires_grad())
            record([a, out, s = std::move(s), d, eps]() {
                for (int i = 0; i < a.rows(); ++i) {
                    const double si = s(i);
                    a.d_->grad.row(i) += out.d_->grad.row(i) / si;
                    if (si > eps) {  // the floor is constant w.r.t. the row
                        const double dot = a.value().row(i).dot(out.d_->grad.row(i));
                        a.d_->grad.row(i) -= a.value().row(i) * (dot / (d * si * si * si));
                    }
                }
            });
        return out;
    }

    Tensor log_softmax_rows(const Tensor& a) {
        const int n = a.rows(), d = a.cols();
        Mat y(n, d);
        for (int i = 0; i < n; ++i) {
            const double m = a.value().row(i).maxCoeff();
            const double lse = m + std::log((a.value().row(i).array() - m).exp().sum());
            y.row(i) = (a.value().row(i).array() - lse).matrix();
        }
        Tensor out = make(std::move(y), a.requires_grad());
        if (out.requires_grad())
            record([a, out]() {
                for (int i = 0; i < a.rows(); ++i) {
                    const double gsum = out.d_->grad.row(i).sum();
                    a.d_->grad.row(i) +=
                        out.d_->grad.row(i) - gsum * out.value().row(i).array().exp().matrix();
                }
            });
        return out;
    }

    // Row t of the result is row order[t] of A.
    Tensor permute_rows(const Tensor& a, std::vector<int> order) {
        if (static_cast<int>(order.size()) != a.rows())
            throw ContractError("permute_rows: order size " + std::to_string(order.size()) +
                                " vs " + shape_str(a.value()));
        Mat y(a.rows(), a.cols());
        for (int t = 0; t < a.rows(); ++t) y.row(t) = a.value().row(order[t]);
        Tensor out = make(std::move(y), a.requires_grad());
        if (out.requires_grad())
            record([a, out, order = std::move(order)]() {
                for (int t = 0; t < a.rows(); ++t)
                    a.d_->grad.row(order[t]) += out.d_->grad.row(t);
            });
        return out;
    }

    Tensor concat_rows(std::span<const Tensor> parts) {
        if (parts.empty()) throw ContractError("concat_rows: no parts");
        const int c = parts.front().cols();
        int total = 0;
        bool rg = false;
        for (const Tensor& p : parts) {
            if (p.cols() != c) throw ContractError("concat_rows: column mismatch");
            total += p.rows();
            rg = rg || p.requires_grad();
        }
        Mat y(total, c);
        int at = 0;
        for (const Tensor& p : parts) {
            y.middleRows(at, p.rows()) = p.value();
            at += p.rows();
        }
        Tensor out = make(std::move(y), rg);
        if (rg)
            record([parts = std::vector<Tensor>(parts.begin(), parts.end()), out]() {
                int at = 0;
                for (const Tensor& p : parts) {
                    if (p.requires_grad())
                        p.d_->grad += out.d_->grad.middleRows(at, p.rows());
                    at += p.rows();
                }
            });
        return out;
    }

    Tensor slice_row(const Tensor& a, int i) {
        if (i < 0 || i >= a.rows())
            throw ContractError("slice_row: row " + std::to_string(i) + " of " +
                                shape_str(a.value()));
        Tensor out = make(a.value().row(i), a.requires_grad());
        if (out.requires_grad())
            record([a, out, i]() { a.d_->grad.row(i) += out.d_->grad.row(0); });
        return out;
    }

    Tensor sum(const Tensor& a) {
        Tensor out = make(Mat::Constant(1, 1, a.value().sum()), a.requires_grad());
        if (out.requires_grad())
            record([a, out]() { a.d_->grad.array() += out.d_->grad(0, 0); });
        return out;
    }

    // Mean over the masked rows of -log_probs[i, labels[i]].
    Tensor masked_nll(const Tensor& log_probs, const std::vector<int>& labels,
                      const std::vector<int>& mask_rows) {
        if (mask_rows.empty()) throw InputError("masked_nll: empty mask");
        double acc = 0.0;
        for (int i : mask_rows) acc -= log_probs.value()(i, labels[i]);
        acc /= static_cast<double>(mask_rows.size());
        Tensor out = make(Mat::Constant(1, 1, acc), log_probs.requires_grad());
        if (out.requires_grad())
            record([log_probs, out, labels, mask_rows]() {
                const double g = out.d_->grad(0, 0) / static_cast<double>(mask_rows.size());
                for (int i : mask_rows) log_probs.d_->grad(i, labels[i]) -= g;
            });
        return out;
    }

    // Seeds d(loss)/d(loss) = 1 and replays recorded operations in reverse.
    // Gradients accumulate into existing grad buffers; the op list is
    // cleared afterwards so the tape can record a fresh forward pass.
    void backward(const Tensor& loss) {
        if (!loss.valid() || loss.d_->producer != this)
            throw ContractError("backward: loss tensor was not produced by this tape");
        if (loss.d_->producer_epoch != epoch_)
            throw ContractError("backward: loss belongs to an already-consumed tape pass");
        if (loss.rows() != 1 || loss.cols() != 1)
            throw ContractError("backward: loss is " + shape_str(loss.value()) + ", not 1x1");
        loss.d_->ensure_grad();
        loss.d_->grad(0, 0) += 1.0;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
        clear();
    }

    void clear() {
        ops_.clear();
        epoch_++;
    }

private:
    Tensor make(Mat value, bool requires_grad) {
        Tensor t = Tensor::leaf(std::move(value), requires_grad);
        if (requires_grad) {
            t.d_->producer = this;
            t.d_->producer_epoch = epoch_;
            t.d_->ensure_grad();
        }
        return t;
    }

    void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

    std::vector<std::function<void()>> ops_;
    std::uint64_t epoch_ = 0;
};

// Central finite differences against the analytic gradients of build_loss.
// Returns the max over parameter entries of |a - n| / max(1, |a|, |n|).
// build_loss must be deterministic in the parameter values.
inline double finite_difference_check(const std::function<Tensor(Tape&)>& build_loss,
                                      std::span<Tensor> params, double h = 1e-5) {
    if (params.empty()) return 0.0;
    for (Tensor& p : params) p.zero_grad();
    {
        Tape tape;
        Tensor loss = build_loss(tape);
        tape.backward(loss);
    }
    std::vector<Mat> analytic;
    analytic.reserve(params.size());
    for (const Tensor& p : params) analytic.push_back(p.grad_or_zero());

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Mat& val = params[pi].value();
        for (int i = 0; i < val.rows(); ++i) {
            for (int j = 0; j < val.cols(); ++j) {
                const double orig = val(i, j);
                val(i, j) = orig + h;
                Tape tp;
                const double fp = build_loss(tp).item();
                val(i, j) = orig - h;
                Tape tm;
                const double fm = build_loss(tm).item();
                val(i, j) = orig;
                const double numeric = (fp - fm) / (2.0 * h);
                const double a = analytic[pi](i, j);
                const double rel =
                    std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
                max_rel = std::max(max_rel, rel);
            }
        }
    }
    return max_rel;
}

}  // namespace graffin
