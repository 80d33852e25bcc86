#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graffin/error.hpp"
#include "graffin/graph.hpp"
#include "graffin/rng.hpp"

namespace graffin {

struct DatasetBundle {
    enum class Provenance { File, Synthetic };
    AttributedGraph graph;
    std::vector<int> train_mask, val_mask, test_mask;  // disjoint node indices
    std::string name;
    Provenance provenance = Provenance::File;
};

struct SplitFractions {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

struct SplitResult {
    std::vector<int> train, val, test;
};

// Stratified per-class shuffled split. Every class lands at least one node
// in train; a class too small to fill all three masks puts one node in
// train and the remainder in test, with a warning. When the fractions sum
// to ~1 the test mask absorbs rounding leftovers.
inline SplitResult split(const AttributedGraph& g, SplitFractions f, std::uint64_t seed,
                         bool stratified = true) {
    if (f.train <= 0.0 || f.val < 0.0 || f.test < 0.0)
        throw ConfigError("split: train fraction must be positive, val/test nonnegative");
    if (f.train + f.val + f.test > 1.0 + 1e-9)
        throw ConfigError("split: fractions sum to more than 1");
    const bool exhaustive = f.train + f.val + f.test >= 1.0 - 1e-9;

    std::vector<std::vector<int>> groups;
    if (stratified) {
        groups.resize(static_cast<std::size_t>(g.num_classes));
        for (int v = 0; v < g.num_nodes; ++v) groups[g.labels[v]].push_back(v);
    } else {
        groups.resize(1);
        for (int v = 0; v < g.num_nodes; ++v) groups[0].push_back(v);
    }

    SplitResult r;
    Rng rng(seed);
    for (auto& ids : groups) {
        const long n = static_cast<long>(ids.size());
        if (n == 0) continue;
        rng.shuffle(ids);
        long n_tr = std::min(n, std::max<long>(1, std::lround(f.train * n)));
        long n_va = std::min(n - n_tr, std::lround(f.val * n));
        long n_te = exhaustive ? n - n_tr - n_va
                               : std::min(n - n_tr - n_va, std::lround(f.test * n));
        if (n < 3 && (f.val > 0.0 || f.test > 0.0) && (n_va == 0 || n_te == 0))
            std::cerr << "split: class group of size " << n
                      << " too small for all masks; train gets 1, rest to test\n";
        for (long i = 0; i < n_tr; ++i) r.train.push_back(ids[i]);
        for (long i = n_tr; i < n_tr + n_va; ++i) r.val.push_back(ids[i]);
        for (long i = n_tr + n_va; i < n_tr + n_va + n_te; ++i) r.test.push_back(ids[i]);
    }
    std::sort(r.train.begin(), r.train.end());
    std::sort(r.val.begin(), r.val.end());
    std::sort(r.test.begin(), r.test.end());
    return r;
}

inline void validate_bundle(const DatasetBundle& b) {
    std::vector<int> seen(static_cast<std::size_t>(b.graph.num_nodes), 0);
    auto check = [&](const std::vector<int>& mask, const char* name) {
        for (int v : mask) {
            if (v < 0 || v >= b.graph.num_nodes)
                throw InputError(std::string("mask '") + name + "' references node " +
                                 std::to_string(v));
            if (seen[v]++)
                throw InputError(std::string("node ") + std::to_string(v) +
                                 " appears in more than one mask");
        }
    };
    check(b.train_mask, "train");
    check(b.val_mask, "val");
    check(b.test_mask, "test");
    std::vector<int> covered(static_cast<std::size_t>(b.graph.num_classes), 0);
    for (int v : b.train_mask) covered[b.graph.labels[v]] = 1;
    for (int c = 0; c < b.graph.num_classes; ++c)
        if (!covered[c])
            throw InputError("class " + std::to_string(c) + " missing from the train mask");
}

namespace detail {

inline std::ifstream open_or_throw(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ParseError(p.string(), 0, "cannot open file");
    return in;
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(std::move(t));
    return toks;
}

inline int parse_int(const std::string& tok, const std::string& file, long line) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, "expected integer, got '" + tok + "'");
    }
}

inline double parse_double(const std::string& tok, const std::string& file, long line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, "expected number, got '" + tok + "'");
    }
}

}  // namespace detail

// Native dataset directory: edges.tsv (u v), features.tsv (id f1..fD),
// labels.tsv (id class), optional masks.tsv (id train|val|test). Missing
// masks are generated with split() under split_seed.
inline DatasetBundle load_native(const std::string& dir, std::uint64_t split_seed = 1) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    const std::string labels_file = (root / "labels.tsv").string();
    const std::string features_file = (root / "features.tsv").string();
    const std::string edges_file = (root / "edges.tsv").string();
    const std::string masks_file = (root / "masks.tsv").string();

    // labels define N and K
    std::vector<int> labels;
    {
        auto in = detail::open_or_throw(labels_file);
        std::string line;
        long lineno = 0;
        std::vector<std::pair<int, int>> rows;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = detail::tokenize(line);
            if (toks.size() != 2) throw ParseError(labels_file, lineno, "expected 'id label'");
            rows.emplace_back(detail::parse_int(toks[0], labels_file, lineno),
                              detail::parse_int(toks[1], labels_file, lineno));
        }
        const int n = static_cast<int>(rows.size());
        labels.assign(static_cast<std::size_t>(n), -1);
        for (const auto& [id, y] : rows) {
            if (id < 0 || id >= n)
                throw ParseError(labels_file, 0,
                                 "node id " + std::to_string(id) + " outside [0, " +
                                     std::to_string(n) + ")");
            if (labels[id] != -1)
                throw ParseError(labels_file, 0, "duplicate node id " + std::to_string(id));
            labels[id] = y;
        }
    }
    const int n = static_cast<int>(labels.size());
    int k = 0;
    for (int y : labels) k = std::max(k, y + 1);

    Mat features;
    {
        auto in = detail::open_or_throw(features_file);
        std::string line;
        long lineno = 0;
        int d = -1;
        std::vector<char> filled(static_cast<std::size_t>(n), 0);
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = detail::tokenize(line);
            if (toks.size() < 2) throw ParseError(features_file, lineno, "expected 'id f1..fD'");
            const int id = detail::parse_int(toks[0], features_file, lineno);
            if (id < 0 || id >= n)
                throw ParseError(features_file, lineno, "unknown node id " + std::to_string(id));
            if (d < 0) {
                d = static_cast<int>(toks.size()) - 1;
                features = Mat::Zero(n, d);
            }
            if (static_cast<int>(toks.size()) - 1 != d)
                throw ParseError(features_file, lineno,
                                 "ragged row: " + std::to_string(toks.size() - 1) +
                                     " values, expected " + std::to_string(d));
            if (filled[id])
                throw ParseError(features_file, lineno, "duplicate node id " + std::to_string(id));
            filled[id] = 1;
            for (int j = 0; j < d; ++j)
                features(id, j) = detail::parse_double(toks[j + 1], features_file, lineno);
        }
        for (int v = 0; v < n; ++v)
            if (!filled[v])
                throw ParseError(features_file, 0, "missing features for node " + std::to_string(v));
    }

    std::vector<std::pair<int, int>> edges;
    {
        auto in = detail::open_or_throw(edges_file);
        std::string line;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = detail::tokenize(line);
            if (toks.size() != 2) throw ParseError(edges_file, lineno, "expected 'u v'");
            const int u = detail::parse_int(toks[0], edges_file, lineno);
            const int v = detail::parse_int(toks[1], edges_file, lineno);
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw ParseError(edges_file, lineno, "unknown node id in edge");
            edges.emplace_back(u, v);
        }
    }

    DatasetBundle b;
    b.graph = build_graph(edges, std::move(features), std::move(labels), k);
    b.name = root.filename().string();
    if (b.name.empty()) b.name = root.parent_path().filename().string();
    b.provenance = DatasetBundle::Provenance::File;

    if (fs::exists(masks_file)) {
        auto in = detail::open_or_throw(masks_file);
        std::string line;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = detail::tokenize(line);
            if (toks.size() != 2)
                throw ParseError(masks_file, lineno, "expected 'id train|val|test'");
            const int id = detail::parse_int(toks[0], masks_file, lineno);
            if (id < 0 || id >= n)
                throw ParseError(masks_file, lineno, "unknown node id " + std::to_string(id));
            if (toks[1] == "train")
                b.train_mask.push_back(id);
            else if (toks[1] == "val")
                b.val_mask.push_back(id);
            else if (toks[1] == "test")
                b.test_mask.push_back(id);
            else
                throw ParseError(masks_file, lineno, "unknown split '" + toks[1] + "'");
        }
        std::sort(b.train_mask.begin(), b.train_mask.end());
        std::sort(b.val_mask.begin(), b.val_mask.end());
        std::sort(b.test_mask.begin(), b.test_mask.end());
    } else {
        SplitResult s = split(b.graph, {}, split_seed);
        b.train_mask = std::move(s.train);
        b.val_mask = std::move(s.val);
        b.test_mask = std::move(s.test);
    }
    validate_bundle(b);
    return b;
}

inline void save_native(const DatasetBundle& b, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path root(dir);
    {
        std::ofstream out(root / "edges.tsv");
        for (int i = 0; i < b.graph.num_nodes; ++i)
            for (int kk = b.graph.adjacency.row_ptr[i]; kk < b.graph.adjacency.row_ptr[i + 1];
                 ++kk) {
                const int j = b.graph.adjacency.col_idx[kk];
                if (i < j) out << i << "\t" << j << "\n";
            }
    }
    {
        std::ofstream out(root / "features.tsv");
        char buf[64];
        for (int i = 0; i < b.graph.num_nodes; ++i) {
            out << i;
            for (int j = 0; j < b.graph.num_features; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", b.graph.features(i, j));
                out << "\t" << buf;
            }
            out << "\n";
        }
    }
    {
        std::ofstream out(root / "labels.tsv");
        for (int i = 0; i < b.graph.num_nodes; ++i) out << i << "\t" << b.graph.labels[i] << "\n";
    }
    {
        std::ofstream out(root / "masks.tsv");
        for (int v : b.train_mask) out << v << "\ttrain\n";
        for (int v : b.val_mask) out << v << "\tval\n";
        for (int v : b.test_mask) out << v << "\ttest\n";
    }
}

// Classic citation-network format. Content rows: <paper_id> <w1..wD> <class>;
// cites rows: <cited> <citing>. String ids map to dense indices by first
// appearance in the content file, class names likewise. Citations touching
// unknown paper ids are dropped with a warning count.
inline DatasetBundle load_cora(const std::string& content_path, const std::string& cites_path,
                               std::uint64_t split_seed = 1) {
    std::map<std::string, int> id_of;
    std::map<std::string, int> class_of;
    std::vector<int> labels;
    std::vector<std::vector<double>> rows;

    {
        auto in = detail::open_or_throw(content_path);
        std::string line;
        long lineno = 0;
        int d = -1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = detail::tokenize(line);
            if (toks.size() < 3)
                throw ParseError(content_path, lineno, "expected '<id> <words...> <class>'");
            if (d < 0) d = static_cast<int>(toks.size()) - 2;
            if (static_cast<int>(toks.size()) - 2 != d)
                throw ParseError(content_path, lineno,
                                 "ragged row: " + std::to_string(toks.size() - 2) +
                                     " word flags, expected " + std::to_string(d));
            if (id_of.count(toks[0]))
                throw ParseError(content_path, lineno, "duplicate paper id " + toks[0]);
            id_of[toks[0]] = static_cast<int>(rows.size());
            std::vector<double> feat(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j)
                feat[j] = detail::parse_double(toks[j + 1], content_path, lineno);
            rows.push_back(std::move(feat));
            const std::string& cls = toks.back();
            auto it = class_of.find(cls);
            if (it == class_of.end())
                it = class_of.emplace(cls, static_cast<int>(class_of.size())).first;
            labels.push_back(it->second);
        }
    }
    const int n = static_cast<int>(rows.size());
    const int d = n > 0 ? static_cast<int>(rows[0].size()) : 0;
    Mat features(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) features(i, j) = rows[i][j];

    std::vector<std::pair<int, int>> edges;
    long dropped = 0;
    {
        auto in = detail::open_or_throw(cites_path);
        std::string line;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = detail::tokenize(line);
            if (toks.size() != 2) throw ParseError(cites_path, lineno, "expected '<cited> <citing>'");
            auto a = id_of.find(toks[0]);
            auto b = id_of.find(toks[1]);
            if (a == id_of.end() || b == id_of.end()) {
                ++dropped;
                continue;
            }
            edges.emplace_back(a->second, b->second);
        }
    }
    if (dropped > 0)
        std::cerr << "load_cora: dropped " << dropped << " citations referencing unknown papers\n";

    DatasetBundle b;
    b.graph = build_graph(edges, std::move(features), std::move(labels),
                          static_cast<int>(class_of.size()));
    b.name = "cora";
    b.provenance = DatasetBundle::Provenance::File;
    SplitResult s = split(b.graph, {}, split_seed);
    b.train_mask = std::move(s.train);
    b.val_mask = std::move(s.val);
    b.test_mask = std::move(s.test);
    validate_bundle(b);
    return b;
}

// Imbalanced stochastic block model: class c holds ceil(head_size * decay^c)
// nodes, intra-class edges appear with p_in, inter-class with p_out, and
// features are a unit vector at coordinate (c mod D) plus isotropic noise.
// The defaults are the desk-scale testbed (372 nodes, class sizes 300/60/12,
// R_imb 25): hard enough that a plain single-layer GCN misses the tail class.
struct SbmSpec {
    int num_classes = 3;
    int head_size = 300;
    double decay = 0.2;
    double p_in = 0.06;
    double p_out = 0.01;
    int feature_dim = 4;
    double feature_noise = 0.8;
    std::uint64_t seed = 2;
};

inline DatasetBundle gen_synthetic(const SbmSpec& spec) {
    if (spec.num_classes < 1) throw ConfigError("sbm: num_classes must be >= 1");
    if (spec.head_size < 1) throw ConfigError("sbm: head_size must be >= 1");
    if (spec.decay <= 0.0 || spec.decay > 1.0) throw ConfigError("sbm: decay must be in (0, 1]");
    if (!(spec.p_in > spec.p_out) || spec.p_out < 0.0 || spec.p_in > 1.0)
        throw ConfigError("sbm: need p_in > p_out >= 0 and p_in <= 1");
    if (spec.feature_dim < 1) throw ConfigError("sbm: feature_dim must be >= 1");
    if (spec.feature_noise < 0.0) throw ConfigError("sbm: feature_noise must be >= 0");

    std::vector<int> sizes(static_cast<std::size_t>(spec.num_classes));
    int n = 0;
    for (int c = 0; c < spec.num_classes; ++c) {
        // the 1e-9 slack keeps fp noise in decay^c from bumping exact products
        const double v = spec.head_size * std::pow(spec.decay, static_cast<double>(c));
        sizes[c] = static_cast<int>(std::ceil(v - 1e-9));
        if (sizes[c] < 1) throw ConfigError("sbm: class " + std::to_string(c) + " has size 0");
        n += sizes[c];
    }

    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < spec.num_classes; ++c)
        labels.insert(labels.end(), static_cast<std::size_t>(sizes[c]), c);
    // scatter class assignments so node ids carry no class signal and the
    // id-order serialization really is a basic random order
    Rng label_rng(mix_seed(spec.seed, 0x1abe1));
    label_rng.shuffle(labels);

    Rng edge_rng(mix_seed(spec.seed, 0xedee));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
            if (edge_rng.bernoulli(p)) edges.emplace_back(i, j);
        }

    Rng feat_rng(mix_seed(spec.seed, 0xfea7));
    Mat features(n, spec.feature_dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < spec.feature_dim; ++j) {
            const double mean = (j == labels[i] % spec.feature_dim) ? 1.0 : 0.0;
            features(i, j) = mean + spec.feature_noise * feat_rng.normal();
        }

    DatasetBundle b;
    b.graph = build_graph(edges, std::move(features), std::move(labels), spec.num_classes);
    b.name = "synthetic";
    b.provenance = DatasetBundle::Provenance::Synthetic;
    SplitResult s = split(b.graph, {}, mix_seed(spec.seed, 0x5137));
    b.train_mask = std::move(s.train);
    b.val_mask = std::move(s.val);
    b.test_mask = std::move(s.test);
    validate_bundle(b);
    return b;
}

// Auto-detects the on-disk format: a directory holding cora.content/cora.cites
// loads through load_cora, otherwise the native TSV layout is expected.
inline DatasetBundle load_dataset(const std::string& path, std::uint64_t split_seed = 1) {
    namespace fs = std::filesystem;
    const fs::path root(path);
    if (fs::exists(root / "cora.content") && fs::exists(root / "cora.cites"))
        return load_cora((root / "cora.content").string(), (root / "cora.cites").string(),
                         split_seed);
    return load_native(path, split_seed);
}

}  // namespace graffin
