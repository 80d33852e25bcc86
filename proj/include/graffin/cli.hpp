#pragma once

// Command implementations behind the graffin CLI. Each command validates its
// configuration before any expensive work, prints a human-readable table to
// the given stream, and returns the machine-readable results document. With
// --out FILE the document is also written through write_json_atomic (so an
// invalid run never leaves a partial file); with --out - the document is
// printed instead of the table.

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "graffin/results.hpp"

namespace graffin {

struct CliConfig {
    std::string dataset_path;    // --dataset DIR
    std::string synthetic_spec;  // --synthetic SPEC.json (or "default")
    TrainConfig train;
    std::string out_file;     // --out FILE ("-" prints JSON to the stream)
    std::string gen_out_dir;  // gen-synthetic target directory
    bool include_timing = false;
    bool hg_stub_ones = false;  // test hook: forces H_g to all-ones
};

inline SbmSpec sbm_spec_from_json_file(const std::string& path) {
    if (path == "default") return SbmSpec{};
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synthetic spec " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("synthetic spec " + path + ": " + e.what());
    }
    SbmSpec s;
    try {
        s.num_classes = j.value("num_classes", s.num_classes);
        s.head_size = j.value("head_size", s.head_size);
        s.decay = j.value("decay", s.decay);
        s.p_in = j.value("p_in", s.p_in);
        s.p_out = j.value("p_out", s.p_out);
        s.feature_dim = j.value("feature_dim", s.feature_dim);
        s.feature_noise = j.value("feature_noise", s.feature_noise);
        s.seed = j.value("seed", s.seed);
    } catch (const std::exception& e) {
        throw ConfigError("synthetic spec " + path + ": " + e.what());
    }
    return s;
}

inline DatasetBundle cli_load_bundle(const CliConfig& c) {
    if (!c.dataset_path.empty() && !c.synthetic_spec.empty())
        throw ConfigError("--dataset and --synthetic are mutually exclusive");
    if (!c.dataset_path.empty()) return load_dataset(c.dataset_path, c.train.seed);
    if (!c.synthetic_spec.empty())
        return gen_synthetic(sbm_spec_from_json_file(c.synthetic_spec));
    throw ConfigError("one of --dataset or --synthetic is required");
}

// "--out -" prints only the JSON document; otherwise the human table goes to
// the stream and the JSON (when --out FILE is given) to the file.
inline void finish_command(const Json& doc, const std::ostringstream& table,
                           const CliConfig& c, std::ostream& out) {
    if (c.out_file == "-") {
        out << doc.dump(2) << "\n";
        return;
    }
    out << table.str();
    if (!c.out_file.empty()) write_json_atomic(doc, c.out_file);
}

namespace detail {

inline std::string pct(double v) {
    if (!std::isfinite(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
    return buf;
}

inline std::string pct_signed(double v) {
    if (!std::isfinite(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f", 100.0 * v);
    return buf;
}

inline std::string mean_dev_pct(const Aggregate& a) {
    if (!std::isfinite(a.mean)) return "n/a";
    return format_mean_dev(100.0 * a.mean, 100.0 * a.dev);
}

inline void print_metric_header(std::ostream& out) {
    out << std::left << std::setw(10) << "" << std::right << std::setw(12) << "ALL"
        << std::setw(12) << "LOW" << std::setw(12) << "A.R." << std::setw(12) << "F1" << "\n";
}

inline void print_metric_row(std::ostream& out, const std::string& label,
                             const RepeatResult& r) {
    out << std::left << std::setw(10) << label << std::right << std::setw(12)
        << mean_dev_pct(r.all_acc) << std::setw(12) << mean_dev_pct(r.low_acc)
        << std::setw(12) << mean_dev_pct(r.auc_macro) << std::setw(12)
        << mean_dev_pct(r.f1_macro) << "\n";
}

}  // namespace detail

// Dataset statistics plus the context-size diagnostics of every strategy.
inline Json run_stats(const CliConfig& c, std::ostream& out) {
    DatasetBundle b = cli_load_bundle(c);
    const ClassStats s = class_stats(b.graph);

    std::ostringstream tbl;
    char rbuf[32];
    std::snprintf(rbuf, sizeof(rbuf), "%.2f", s.r_imb);
    tbl << "dataset " << b.name << ": N=" << b.graph.num_nodes
        << " D=" << b.graph.num_features << " K=" << b.graph.num_classes
        << " edges=" << b.graph.num_edges() << " R_imb=" << rbuf << "\n";
    tbl << "head class " << s.head_class << " (" << s.counts[s.head_class]
        << " nodes), tail class " << s.tail_class << " (" << s.counts[s.tail_class]
        << " nodes)\n";
    tbl << "masks: train " << b.train_mask.size() << ", val " << b.val_mask.size()
        << ", test " << b.test_mask.size() << "\n";

    Json enrichment = Json::object();
    tbl << std::left << std::setw(8) << "strategy" << std::right << std::setw(12) << "r_g"
        << std::setw(12) << "r_g approx" << std::setw(12) << "r_l" << std::setw(12)
        << "r_l approx" << "\n";
    for (Strategy st : {Strategy::Degree, Strategy::Eigen, Strategy::NodeId}) {
        const Serialization ser = serialize(b.graph, st);
        const EnrichmentReport er = enrichment_report(b.graph, ser, s);
        enrichment[strategy_name(st)] = to_json(er);
        tbl << std::left << std::setw(8) << strategy_name(st) << std::right << std::setw(12)
            << std::setprecision(4) << er.r_g << std::setw(12) << er.r_g_approx
            << std::setw(12) << er.r_l << std::setw(12) << er.r_l_approx << "\n";
    }

    Json doc{{"schema_version", 1},
             {"command", "stats"},
             {"dataset", dataset_header(b)},
             {"enrichment", enrichment}};
    finish_command(doc, tbl, c, out);
    return doc;
}

inline Json run_train(const CliConfig& c, std::ostream& out) {
    c.train.validate();
    DatasetBundle b = cli_load_bundle(c);

    ForwardHooks hooks;
    Mat ones;
    if (c.hg_stub_ones) {
        ones = Mat::Ones(b.graph.num_nodes, c.train.hidden);
        hooks.hg_override = &ones;
    }
    const auto t0 = std::chrono::steady_clock::now();
    RepeatResult rr = repeat_runs(b, c.train, hooks);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream tbl;
    tbl << "train " << b.name << " (" << (c.train.graffin_enabled ? "+graffin" : "vanilla")
        << ", " << strategy_name(c.train.strategy) << ", "
        << aggregation_name(c.train.aggregation) << ", " << c.train.repeats << " seeds from "
        << c.train.seed << ")\n";
    detail::print_metric_header(tbl);
    detail::print_metric_row(tbl, "mean^dev", rr);
    if (c.include_timing)
        tbl << "wall clock: " << std::setprecision(3) << seconds << " s\n";

    const Serialization ser = serialize(b.graph, c.train.strategy);
    const EnrichmentReport er = enrichment_report(b.graph, ser, class_stats(b.graph));
    Json doc{{"schema_version", 1},
             {"command", "train"},
             {"dataset", dataset_header(b)},
             {"config", to_json(c.train)},
             {"enrichment", to_json(er)},
             {"results", runs_json(rr, c.include_timing)},
             {"per_class", per_class_json(b, rr)},
             {"timing_seconds", c.include_timing ? Json(seconds) : Json(nullptr)}};
    finish_command(doc, tbl, c, out);
    return doc;
}

// Vanilla baseline and the +Graffin arm under matched seeds, with deltas.
inline Json run_compare(const CliConfig& c, std::ostream& out) {
    c.train.validate();
    DatasetBundle b = cli_load_bundle(c);

    ForwardHooks graffin_hooks;
    Mat ones;
    if (c.hg_stub_ones) {
        ones = Mat::Ones(b.graph.num_nodes, c.train.hidden);
        graffin_hooks.hg_override = &ones;
    }

    TrainConfig vanilla_cfg = c.train;
    vanilla_cfg.graffin_enabled = false;
    TrainConfig graffin_cfg = c.train;
    graffin_cfg.graffin_enabled = true;

    RepeatResult vanilla = repeat_runs(b, vanilla_cfg);
    RepeatResult graffin = repeat_runs(b, graffin_cfg, graffin_hooks);

    std::ostringstream tbl;
    tbl << "compare " << b.name << " (" << strategy_name(c.train.strategy) << ", "
        << aggregation_name(c.train.aggregation) << ", " << c.train.repeats
        << " matched seeds from " << c.train.seed << ")\n";
    detail::print_metric_header(tbl);
    detail::print_metric_row(tbl, "vanilla", vanilla);
    detail::print_metric_row(tbl, "+graffin", graffin);
    tbl << std::left << std::setw(10) << "delta" << std::right << std::setw(12)
        << detail::pct_signed(graffin.all_acc.mean - vanilla.all_acc.mean) << std::setw(12)
        << detail::pct_signed(graffin.low_acc.mean - vanilla.low_acc.mean) << std::setw(12)
        << detail::pct_signed(graffin.auc_macro.mean - vanilla.auc_macro.mean)
        << std::setw(12)
        << detail::pct_signed(graffin.f1_macro.mean - vanilla.f1_macro.mean) << "\n";

    Json doc{{"schema_version", 1},
             {"command", "compare"},
             {"dataset", dataset_header(b)},
             {"config", to_json(c.train)},
             {"arms",
              Json{{"vanilla", runs_json(vanilla, c.include_timing)},
                   {"graffin", runs_json(graffin, c.include_timing)}}},
             {"delta",
              Json{{"all", json_number(graffin.all_acc.mean - vanilla.all_acc.mean)},
                   {"low", json_number(graffin.low_acc.mean - vanilla.low_acc.mean)},
                   {"auc", json_number(graffin.auc_macro.mean - vanilla.auc_macro.mean)},
                   {"f1", json_number(graffin.f1_macro.mean - vanilla.f1_macro.mean)}}}};
    finish_command(doc, tbl, c, out);
    return doc;
}

// Serialization ablation: degree is the absolute baseline row, the other
// strategies report signed F1 deltas against it.
inline Json run_ablate(const CliConfig& c, std::ostream& out) {
    c.train.validate();
    DatasetBundle b = cli_load_bundle(c);

    std::ostringstream tbl;
    Json rows = Json::array();
    RepeatResult degree;
    tbl << "ablate " << b.name << " (F1, " << c.train.repeats << " matched seeds from "
        << c.train.seed << "; degree row absolute, others relative)\n";
    for (Strategy st : {Strategy::Degree, Strategy::Eigen, Strategy::NodeId}) {
        TrainConfig cfg = c.train;
        cfg.strategy = st;
        cfg.graffin_enabled = true;
        RepeatResult r = repeat_runs(b, cfg);
        Json row{{"strategy", strategy_name(st)},
                 {"f1_mean", json_number(r.f1_macro.mean)},
                 {"f1_dev", json_number(r.f1_macro.dev)},
                 {"all_mean", json_number(r.all_acc.mean)},
                 {"low_mean", json_number(r.low_acc.mean)},
                 {"results", runs_json(r, c.include_timing)}};
        if (st == Strategy::Degree) {
            degree = r;
            row["relative_f1"] = nullptr;
            tbl << std::left << std::setw(8) << strategy_name(st) << std::right
                << std::setw(12) << detail::mean_dev_pct(r.f1_macro) << "\n";
        } else {
            const double delta = r.f1_macro.mean - degree.f1_macro.mean;
            row["relative_f1"] = json_number(delta);
            tbl << std::left << std::setw(8) << strategy_name(st) << std::right
                << std::setw(12) << detail::pct_signed(delta) << "\n";
        }
        rows.push_back(std::move(row));
    }

    Json doc{{"schema_version", 1},
             {"command", "ablate"},
             {"dataset", dataset_header(b)},
             {"config", to_json(c.train)},
             {"baseline_strategy", "degree"},
             {"rows", rows}};
    finish_command(doc, tbl, c, out);
    return doc;
}

// Per-class accuracy for both arms, classes ordered head to tail.
inline Json run_perclass(const CliConfig& c, std::ostream& out) {
    c.train.validate();
    DatasetBundle b = cli_load_bundle(c);

    TrainConfig vanilla_cfg = c.train;
    vanilla_cfg.graffin_enabled = false;
    TrainConfig graffin_cfg = c.train;
    graffin_cfg.graffin_enabled = true;
    RepeatResult vanilla = repeat_runs(b, vanilla_cfg);
    RepeatResult graffin = repeat_runs(b, graffin_cfg);

    Json vj = per_class_json(b, vanilla);
    Json gj = per_class_json(b, graffin);

    std::ostringstream tbl;
    tbl << "class,count,vanilla,graffin\n";
    for (std::size_t i = 0; i < vj["class_order"].size(); ++i) {
        const auto cell = [](const Json& v) {
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        tbl << vj["class_order"][i] << "," << vj["counts"][i] << ","
            << detail::pct(cell(vj["accuracy_mean"][i])) << ","
            << detail::pct(cell(gj["accuracy_mean"][i])) << "\n";
    }

    Json doc{{"schema_version", 1},
             {"command", "perclass"},
             {"dataset", dataset_header(b)},
             {"config", to_json(c.train)},
             {"class_order", vj["class_order"]},
             {"counts", vj["counts"]},
             {"vanilla_accuracy_mean", vj["accuracy_mean"]},
             {"graffin_accuracy_mean", gj["accuracy_mean"]}};
    finish_command(doc, tbl, c, out);
    return doc;
}

// Materializes a synthetic dataset into the native TSV layout.
inline Json run_gen_synthetic(const CliConfig& c, std::ostream& out) {
    if (c.gen_out_dir.empty()) throw ConfigError("gen-synthetic requires --out DIR");
    const std::string spec_path =
        c.synthetic_spec.empty() ? std::string("default") : c.synthetic_spec;
    const SbmSpec spec = sbm_spec_from_json_file(spec_path);
    DatasetBundle b = gen_synthetic(spec);
    save_native(b, c.gen_out_dir);
    out << "wrote " << b.graph.num_nodes << " nodes, " << b.graph.num_edges() << " edges to "
        << c.gen_out_dir << "\n";
    return Json{{"schema_version", 1},
                {"command", "gen-synthetic"},
                {"dataset", dataset_header(b)},
                {"out_dir", c.gen_out_dir}};
}

}  // namespace graffin
