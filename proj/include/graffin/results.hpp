#pragma once

// Machine-readable results documents (schema_version 1). Non-finite values
// (undefined metrics, infinite ratios) serialize as JSON null. Keys are
// emitted in sorted order and doubles in shortest round-trip form, so a
// document is byte-stable for identical inputs.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "graffin/dataio.hpp"
#include "graffin/metrics.hpp"
#include "graffin/model.hpp"
#include "graffin/serialize.hpp"

namespace graffin {

using Json = nlohmann::json;

inline Json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

inline Json to_json(const ClassStats& s) {
    return Json{{"counts", s.counts},
                {"head_class", s.head_class},
                {"tail_class", s.tail_class},
                {"r_imb", json_number(s.r_imb)}};
}

inline Json to_json(const EnrichmentReport& r) {
    return Json{{"mean_gs_head", json_number(r.mean_gs_head)},
                {"mean_gs_tail", json_number(r.mean_gs_tail)},
                {"mean_mp_head", json_number(r.mean_mp_head)},
                {"mean_mp_tail", json_number(r.mean_mp_tail)},
                {"r_g", json_number(r.r_g)},
                {"r_l", json_number(r.r_l)},
                {"r_g_approx", json_number(r.r_g_approx)},
                {"r_l_approx", json_number(r.r_l_approx)}};
}

inline Json to_json(const MetricsReport& m) {
    Json pca = Json::array();
    for (double v : m.per_class_acc) pca.push_back(json_number(v));
    return Json{{"all", json_number(m.all_acc)},
                {"low", json_number(m.low_acc)},
                {"auc", json_number(m.auc_macro)},
                {"f1", json_number(m.f1_macro)},
                {"per_class_acc", pca},
                {"auc_skipped_classes", m.auc_skipped_classes}};
}

inline Json to_json(const TrainConfig& c) {
    return Json{{"epochs", c.epochs},
                {"lr", c.lr},
                {"weight_decay", c.weight_decay},
                {"hidden", c.hidden},
                {"strategy", strategy_name(c.strategy)},
                {"aggregation", aggregation_name(c.aggregation)},
                {"seed", c.seed},
                {"graffin", c.graffin_enabled},
                {"repeats", c.repeats}};
}

inline Json dataset_header(const DatasetBundle& b) {
    const ClassStats s = class_stats(b.graph);
    return Json{{"name", b.name},
                {"num_nodes", b.graph.num_nodes},
                {"num_features", b.graph.num_features},
                {"num_classes", b.graph.num_classes},
                {"num_edges", b.graph.num_edges()},
                {"class_stats", to_json(s)},
                {"train_size", b.train_mask.size()},
                {"val_size", b.val_mask.size()},
                {"test_size", b.test_mask.size()}};
}

// mean/dev stored raw in [0,1]; "formatted" is the percent-scale table form.
inline Json aggregate_json(const Aggregate& a) {
    return Json{{"mean", json_number(a.mean)},
                {"dev", json_number(a.dev)},
                {"formatted", format_mean_dev(100.0 * a.mean, 100.0 * a.dev)}};
}

inline Json runs_json(const RepeatResult& r, bool include_timing) {
    Json runs = Json::array();
    for (const RunHistory& h : r.runs) {
        Json run{{"seed", h.seed},
                 {"metrics", to_json(h.final_metrics)},
                 {"initial_loss", json_number(h.losses.front())},
                 {"final_loss", json_number(h.losses.back())},
                 {"epochs", h.losses.size()}};
        if (include_timing) run["seconds"] = h.seconds;
        runs.push_back(std::move(run));
    }
    return Json{{"runs", runs},
                {"aggregate",
                 Json{{"all", aggregate_json(r.all_acc)},
                      {"low", aggregate_json(r.low_acc)},
                      {"auc", aggregate_json(r.auc_macro)},
                      {"f1", aggregate_json(r.f1_macro)}}}};
}

// Class ids sorted head to tail (count descending, id ascending on ties),
// with the across-seed mean accuracy per class.
inline Json per_class_json(const DatasetBundle& b, const RepeatResult& r) {
    const ClassStats s = class_stats(b.graph);
    std::vector<int> order(static_cast<std::size_t>(b.graph.num_classes));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int c) {
        if (s.counts[a] != s.counts[c]) return s.counts[a] > s.counts[c];
        return a < c;
    });
    Json counts = Json::array(), acc = Json::array();
    for (int c : order) {
        counts.push_back(s.counts[c]);
        double mean = 0.0;
        for (const RunHistory& h : r.runs) mean += h.final_metrics.per_class_acc[c];
        acc.push_back(json_number(mean / static_cast<double>(r.runs.size())));
    }
    return Json{{"class_order", order}, {"counts", counts}, {"accuracy_mean", acc}};
}

// Writes via a temp file and rename so failed runs never leave partial output.
inline void write_json_atomic(const Json& doc, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot open output file " + tmp.string());
        out << doc.dump(2) << "\n";
    }
    fs::rename(tmp, target);
}

}  // namespace graffin
