#pragma once

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graffin/adam.hpp"
#include "graffin/autodiff.hpp"
#include "graffin/dataio.hpp"
#include "graffin/layers.hpp"
#include "graffin/metrics.hpp"
#include "graffin/serialize.hpp"

namespace graffin {

// All learnable state of the fused model: the two Graffin projections, the
// GRU core, the message-passing weight and the classifier. Every matrix is
// seeded independently, so the MP and classifier weights are identical
// across plugged/unplugged arms that share a master seed.
struct GraffinParams {
    LinearParams proj1;       // D -> hidden, GeLU branch
    LinearParams proj2;       // D -> hidden, GRU branch input
    GruParams gru;            // hidden -> hidden
    MpParams mp;              // D -> hidden
    LinearParams classifier;  // hidden -> K

    static GraffinParams create(int in_dim, int hidden, int num_classes, Aggregation aggr,
                                std::uint64_t seed) {
        GraffinParams p;
        p.proj1 = LinearParams::create(in_dim, hidden, mix_seed(seed, 100));
        p.proj2 = LinearParams::create(in_dim, hidden, mix_seed(seed, 101));
        p.gru = GruParams::create(hidden, hidden, mix_seed(seed, 102));
        p.mp = MpParams::create(in_dim, hidden, aggr, mix_seed(seed, 103));
        p.classifier = LinearParams::create(hidden, num_classes, mix_seed(seed, 104));
        return p;
    }

    struct Named {
        std::string name;
        Tensor tensor;
        bool decay;  // weight matrices decay, biases and h0 do not
    };

    std::vector<Named> all_parameters() const {
        return {
            {"proj1.W", proj1.W, true},   {"proj1.b", proj1.b, false},
            {"proj2.W", proj2.W, true},   {"proj2.b", proj2.b, false},
            {"gru.W_z", gru.W_z, true},   {"gru.W_r", gru.W_r, true},
            {"gru.W_s", gru.W_s, true},   {"gru.U_z", gru.U_z, true},
            {"gru.U_r", gru.U_r, true},   {"gru.U_s", gru.U_s, true},
            {"gru.b_z", gru.b_z, false},  {"gru.b_r", gru.b_r, false},
            {"gru.b_s", gru.b_s, false},  {"gru.h0", gru.h0, false},
            {"mp.W", mp.W, true},         {"classifier.W", classifier.W, true},
            {"classifier.b", classifier.b, false},
        };
    }

    std::vector<Named> trainable_parameters(bool graffin_enabled) const {
        if (graffin_enabled) return all_parameters();
        return {{"mp.W", mp.W, true},
                {"classifier.W", classifier.W, true},
                {"classifier.b", classifier.b, false}};
    }
};

struct TrainConfig {
    int epochs = 200;
    double lr = 0.01;
    double weight_decay = 5e-4;
    int hidden = 64;
    Strategy strategy = Strategy::Degree;
    Aggregation aggregation = Aggregation::GcnNorm;
    std::uint64_t seed = 1;
    bool graffin_enabled = true;
    int repeats = 5;

    void validate() const {
        if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
        if (!(lr >= 0.0)) throw ConfigError("config: lr must be >= 0");
        if (weight_decay < 0.0) throw ConfigError("config: weight_decay must be >= 0");
        if (hidden < 1) throw ConfigError("config: hidden must be >= 1");
        if (repeats < 1) throw ConfigError("config: repeats must be >= 1");
    }
};

struct RunHistory {
    std::vector<double> losses;  // training loss per epoch, recorded pre-update
    MetricsReport final_metrics;
    double seconds = 0.0;
    std::uint64_t seed = 0;
};

// Constant per-run inputs: the serialization, the aggregation operator and
// the feature matrix in both plain and sequence (permuted + RMS-normalized)
// form. The normalization is deterministic and input-only, so it is applied
// once here rather than per epoch.
struct ModelInputs {
    Serialization ser;
    CsrMatrix agg;
    CsrMatrix x;      // features, node order
    CsrMatrix x_seq;  // features, sequence order, RMS-normalized rows

    static ModelInputs prepare(const AttributedGraph& g, Strategy strategy, Aggregation aggr,
                               double rms_eps = 1e-8) {
        ModelInputs in;
        in.ser = serialize(g, strategy);
        in.agg = aggregation_matrix(g, aggr);
        in.x = CsrMatrix::from_dense(g.features);
        Mat xp = permute_rows(g.features, in.ser.order);
        const int d = static_cast<int>(xp.cols());
        for (int i = 0; i < xp.rows(); ++i)
            xp.row(i) /= std::max(std::sqrt(xp.row(i).squaredNorm() / d), rms_eps);
        in.x_seq = CsrMatrix::from_dense(xp);
        return in;
    }
};

struct ForwardHooks {
    const Mat* hg_override = nullptr;  // replaces H_g (node order) when set
    bool gru_identity = false;         // bypasses the recurrence in branch 2
};

// The Graffin block over a sequence-ordered input: GeLU(linear1(X')) gated
// elementwise by GRU(linear2(X')). Output stays in sequence order.
inline Tensor graffin_forward(Tape& tape, const Tensor& x_seq, const GraffinParams& p,
                              bool gru_identity = false) {
    Tensor t1 = tape.gelu(linear_forward(tape, x_seq, p.proj1));
    Tensor t2 = linear_forward(tape, x_seq, p.proj2);
    if (!gru_identity) t2 = gru_sequence(tape, t2, p.gru);
    return tape.hadamard(t1, t2);
}

inline Tensor graffin_forward(Tape& tape, const CsrMatrix& x_seq, const GraffinParams& p,
                              bool gru_identity = false) {
    Tensor t1 = tape.gelu(linear_forward(tape, x_seq, p.proj1));
    Tensor t2 = linear_forward(tape, x_seq, p.proj2);
    if (!gru_identity) t2 = gru_sequence(tape, t2, p.gru);
    return tape.hadamard(t1, t2);
}

struct ForwardResult {
    Tensor logits;  // N x K
    Tensor h_f;     // N x hidden
};

// Local branch through message passing, global branch through the Graffin
// block (when enabled), Hadamard fusion, then the linear classifier. With
// graffin_enabled=false this is exactly the vanilla MP baseline.
inline ForwardResult fused_forward(Tape& tape, const ModelInputs& in, const GraffinParams& p,
                                   bool graffin_enabled, const ForwardHooks& hooks = {}) {
    Tensor h_l = mp_forward(tape, in.agg, in.x, p.mp);
    Tensor h_f;
    if (graffin_enabled) {
        Tensor h_g;
        if (hooks.hg_override) {
            h_g = Tensor::leaf(*hooks.hg_override, false);
        } else {
            Tensor hg_seq = graffin_forward(tape, in.x_seq, p, hooks.gru_identity);
            h_g = tape.permute_rows(hg_seq, in.ser.inverse);  // sequence -> node order
        }
        h_f = tape.hadamard(h_l, h_g);
    } else {
        h_f = h_l;
    }
    Tensor logits = linear_forward(tape, h_f, p.classifier);
    return {logits, h_f};
}

// Mean over masked nodes of -log_softmax(logits)[i, label_i].
inline Tensor nll_loss(Tape& tape, const Tensor& logits, const std::vector<int>& labels,
                       const std::vector<int>& mask) {
    if (mask.empty()) throw InputError("nll_loss: empty mask");
    return tape.masked_nll(tape.log_softmax_rows(logits), labels, mask);
}

struct TrainResult {
    GraffinParams params;
    RunHistory history;
};

// Full-batch transductive training: the serialization is computed once
// before the loop, then each epoch runs the fused forward pass, the masked
// loss, backward, and one Adam step. Runs exactly cfg.epochs epochs. Final
// metrics are evaluated on the test mask.
inline TrainResult train(const DatasetBundle& bundle, const TrainConfig& cfg,
                         const ForwardHooks& hooks = {}) {
    cfg.validate();
    if (bundle.train_mask.empty()) throw InputError("train: empty train mask");
    const auto t0 = std::chrono::steady_clock::now();

    const AttributedGraph& g = bundle.graph;
    ModelInputs in = ModelInputs::prepare(g, cfg.strategy, cfg.aggregation);
    GraffinParams params =
        GraffinParams::create(g.num_features, cfg.hidden, g.num_classes, cfg.aggregation,
                              cfg.seed);
    AdamOptimizer opt({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    for (const auto& np : params.trainable_parameters(cfg.graffin_enabled))
        opt.add_param(np.tensor, np.name, np.decay);

    RunHistory hist;
    hist.seed = cfg.seed;
    Tape tape;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        ForwardResult fw = fused_forward(tape, in, params, cfg.graffin_enabled, hooks);
        Tensor loss = nll_loss(tape, fw.logits, g.labels, bundle.train_mask);
        const double lv = loss.item();
        if (!std::isfinite(lv))
            throw Error("train: non-finite loss at epoch " + std::to_string(epoch));
        hist.losses.push_back(lv);
        tape.backward(loss);
        opt.step();
    }

    ForwardResult fw = fused_forward(tape, in, params, cfg.graffin_enabled, hooks);
    const Mat logits = fw.logits.value();
    tape.clear();
    if (!bundle.test_mask.empty()) {
        const ClassStats stats = class_stats(g);
        hist.final_metrics =
            evaluate(logits, g.labels, bundle.test_mask, g.num_classes, stats.tail_class);
    } else {
        hist.final_metrics.all_acc = undefined_metric();
        hist.final_metrics.low_acc = undefined_metric();
        hist.final_metrics.auc_macro = undefined_metric();
        hist.final_metrics.f1_macro = undefined_metric();
    }
    hist.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(params), std::move(hist)};
}

struct RepeatResult {
    std::vector<RunHistory> runs;  // seeds cfg.seed .. cfg.seed + repeats - 1
    Aggregate all_acc, low_acc, auc_macro, f1_macro;
};

// Runs cfg.repeats seeds and aggregates mean and population deviation per
// metric, as in the mean^dev result tables.
inline RepeatResult repeat_runs(const DatasetBundle& bundle, const TrainConfig& cfg,
                                const ForwardHooks& hooks = {}) {
    cfg.validate();
    RepeatResult r;
    std::vector<double> alls, lows, aucs, f1s;
    for (int i = 0; i < cfg.repeats; ++i) {
        TrainConfig c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(i);
        RunHistory h = train(bundle, c, hooks).history;
        alls.push_back(h.final_metrics.all_acc);
        lows.push_back(h.final_metrics.low_acc);
        aucs.push_back(h.final_metrics.auc_macro);
        f1s.push_back(h.final_metrics.f1_macro);
        r.runs.push_back(std::move(h));
    }
    r.all_acc = aggregate(alls);
    r.low_acc = aggregate(lows);
    r.auc_macro = aggregate(aucs);
    r.f1_macro = aggregate(f1s);
    return r;
}

// Checkpoints are a textual key -> matrix map with shape headers; values are
// hexfloat so round-trips are exact. Layout:
//   graffin-checkpoint 1
//   aggregation <gcn|mean>
//   <entry count>
//   <name> <rows> <cols>
//   <cols hexfloat values per row line>
inline void save_checkpoint(const GraffinParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_checkpoint: cannot open " + path);
    const auto named = params.all_parameters();
    out << "graffin-checkpoint 1\n";
    out << "aggregation " << aggregation_name(params.mp.aggregation) << "\n";
    out << named.size() << "\n";
    char buf[64];
    for (const auto& np : named) {
        const Mat& m = np.tensor.value();
        out << np.name << " " << m.rows() << " " << m.cols() << "\n";
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%a", m(i, j));
                out << (j ? " " : "") << buf;
            }
            out << "\n";
        }
    }
}

inline GraffinParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_checkpoint: cannot open " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "graffin-checkpoint" || version != 1)
        throw ParseError(path, 1, "not a graffin-checkpoint v1 file");
    std::string key, aggr_name;
    in >> key >> aggr_name;
    if (key != "aggregation") throw ParseError(path, 2, "expected aggregation line");
    std::size_t count = 0;
    in >> count;
    std::map<std::string, Mat> entries;
    for (std::size_t e = 0; e < count; ++e) {
        std::string name;
        int rows = 0, cols = 0;
        if (!(in >> name >> rows >> cols))
            throw ParseError(path, 0, "truncated entry header");
        Mat m(rows, cols);
        std::string tok;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                if (!(in >> tok)) throw ParseError(path, 0, "truncated values in " + name);
                m(i, j) = std::strtod(tok.c_str(), nullptr);
            }
        entries.emplace(std::move(name), std::move(m));
    }
    auto take = [&](const std::string& name) {
        auto it = entries.find(name);
        if (it == entries.end()) throw ParseError(path, 0, "missing entry " + name);
        return Tensor::leaf(std::move(it->second), true);
    };
    GraffinParams p;
    p.proj1.W = take("proj1.W");
    p.proj1.b = take("proj1.b");
    p.proj2.W = take("proj2.W");
    p.proj2.b = take("proj2.b");
    p.gru.W_z = take("gru.W_z");
    p.gru.W_r = take("gru.W_r");
    p.gru.W_s = take("gru.W_s");
    p.gru.U_z = take("gru.U_z");
    p.gru.U_r = take("gru.U_r");
    p.gru.U_s = take("gru.U_s");
    p.gru.b_z = take("gru.b_z");
    p.gru.b_r = take("gru.b_r");
    p.gru.b_s = take("gru.b_s");
    p.gru.h0 = take("gru.h0");
    p.mp.W = take("mp.W");
    p.mp.aggregation = aggregation_from_name(aggr_name);
    p.classifier.W = take("classifier.W");
    p.classifier.b = take("classifier.b");
    return p;
}

}  // namespace graffin
