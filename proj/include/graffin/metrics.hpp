#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "graffin/error.hpp"
#include "graffin/matrix.hpp"

namespace graffin {

inline double undefined_metric() { return std::numeric_limits<double>::quiet_NaN(); }

// Argmax per row; ties resolve to the smallest class id.
inline std::vector<int> argmax_rows(const Mat& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.rows()));
    for (int i = 0; i < scores.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < scores.cols(); ++j)
            if (scores(i, j) > scores(i, best)) best = j;
        out[i] = best;
    }
    return out;
}

inline Mat softmax_rows(const Mat& logits) {
    Mat p(logits.rows(), logits.cols());
    for (int i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        p.row(i) = (logits.row(i).array() - m).exp().matrix();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

inline double overall_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                               const std::vector<int>& mask) {
    if (mask.empty()) throw InputError("overall_accuracy: empty mask");
    long correct = 0;
    for (int i : mask) correct += pred[i] == truth[i];
    return static_cast<double>(correct) / static_cast<double>(mask.size());
}

// Accuracy restricted to masked nodes of the tail class; NaN when the mask
// holds no tail node.
inline double tail_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                            const std::vector<int>& mask, int tail_class) {
    long correct = 0, total = 0;
    for (int i : mask) {
        if (truth[i] != tail_class) continue;
        total++;
        correct += pred[i] == tail_class;
    }
    if (total == 0) return undefined_metric();
    return static_cast<double>(correct) / static_cast<double>(total);
}

inline std::vector<double> per_class_accuracy(const std::vector<int>& pred,
                                              const std::vector<int>& truth,
                                              const std::vector<int>& mask, int num_classes) {
    std::vector<long> correct(static_cast<std::size_t>(num_classes), 0);
    std::vector<long> total(static_cast<std::size_t>(num_classes), 0);
    for (int i : mask) {
        total[truth[i]]++;
        correct[truth[i]] += pred[i] == truth[i];
    }
    std::vector<double> acc(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c)
        acc[c] = total[c] == 0 ? undefined_metric()
                               : static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    return acc;
}

// Unweighted mean of per-class F1. A class with TP+FP=0 or TP+FN=0 gets
// F1=0 unless TP=FP=FN=0, in which case the class is vacuous and counts 1.
inline double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                       const std::vector<int>& mask, int num_classes) {
    if (mask.empty()) throw InputError("macro_f1: empty mask");
    std::vector<long> tp(static_cast<std::size_t>(num_classes), 0);
    std::vector<long> fp(static_cast<std::size_t>(num_classes), 0);
    std::vector<long> fn(static_cast<std::size_t>(num_classes), 0);
    for (int i : mask) {
        if (pred[i] == truth[i]) {
            tp[truth[i]]++;
        } else {
            fp[pred[i]]++;
            fn[truth[i]]++;
        }
    }
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        if (tp[c] == 0 && fp[c] == 0 && fn[c] == 0) {
            sum += 1.0;
        } else if (tp[c] == 0) {
            sum += 0.0;
        } else {
            const double p = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
            const double r = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
            sum += 2.0 * p * r / (p + r);
        }
    }
    return sum / num_classes;
}

// One-vs-rest AUC for one score column via the Mann-Whitney rank statistic
// with midrank tie correction. NaN when positives or negatives are missing.
inline double auc_binary(const std::vector<double>& scores, const std::vector<bool>& positive) {
    const std::size_t n = scores.size();
    long n_pos = 0;
    for (bool b : positive) n_pos += b;
    const long n_neg = static_cast<long>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) return undefined_metric();

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (positive[idx[k]]) rank_sum_pos += midrank;
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Macro one-vs-rest AUC over classes having at least one positive and one
// negative in the mask; classes lacking both sides are skipped and returned
// through `skipped`. NaN when no class qualifies.
inline double auc_roc_macro(const Mat& probs, const std::vector<int>& truth,
                            const std::vector<int>& mask, int num_classes,
                            std::vector<int>* skipped = nullptr) {
    if (mask.empty()) throw InputError("auc_roc_macro: empty mask");
    double sum = 0.0;
    int used = 0;
    for (int c = 0; c < num_classes; ++c) {
        std::vector<double> scores;
        std::vector<bool> positive;
        scores.reserve(mask.size());
        positive.reserve(mask.size());
        for (int i : mask) {
            scores.push_back(probs(i, c));
            positive.push_back(truth[i] == c);
        }
        const double auc = auc_binary(scores, positive);
        if (std::isnan(auc)) {
            if (skipped) skipped->push_back(c);
            continue;
        }
        sum += auc;
        used++;
    }
    if (used == 0) return undefined_metric();
    return sum / used;
}

struct MetricsReport {
    double all_acc = 0.0;
    double low_acc = 0.0;
    double auc_macro = 0.0;
    double f1_macro = 0.0;
    std::vector<double> per_class_acc;
    std::vector<int> auc_skipped_classes;
};

inline MetricsReport evaluate(const Mat& logits, const std::vector<int>& truth,
                              const std::vector<int>& mask, int num_classes, int tail_class) {
    const std::vector<int> pred = argmax_rows(logits);
    const Mat probs = softmax_rows(logits);
    MetricsReport r;
    r.all_acc = overall_accuracy(pred, truth, mask);
    r.low_acc = tail_accuracy(pred, truth, mask, tail_class);
    r.f1_macro = macro_f1(pred, truth, mask, num_classes);
    r.auc_macro = auc_roc_macro(probs, truth, mask, num_classes, &r.auc_skipped_classes);
    r.per_class_acc = per_class_accuracy(pred, truth, mask, num_classes);
    return r;
}

struct Aggregate {
    double mean = 0.0;
    double dev = 0.0;  // population standard deviation
};

inline Aggregate aggregate(std::span<const double> values) {
    Aggregate a;
    if (values.empty()) return a;
    for (double v : values) a.mean += v;
    a.mean /= static_cast<double>(values.size());
    for (double v : values) a.dev += (v - a.mean) * (v - a.mean);
    a.dev = std::sqrt(a.dev / static_cast<double>(values.size()));
    return a;
}

// "mean^dev" with one decimal each, as in the result tables.
inline std::string format_mean_dev(double mean, double dev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f^%.1f", mean, dev);
    return buf;
}

}  // namespace graffin
