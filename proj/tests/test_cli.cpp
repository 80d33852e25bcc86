#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "graffin/cli.hpp"

using namespace graffin;
namespace fs = std::filesystem;

namespace {

// small, fast synthetic spec for CLI-level tests
std::string small_spec_file() {
    static std::string path;
    if (path.empty()) {
        path = (fs::temp_directory_path() / "graffin_cli_spec.json").string();
        std::ofstream out(path);
        out << R"({"num_classes":3,"head_size":40,"decay":0.4,"p_in":0.3,"p_out":0.03,)"
            << R"("feature_dim":4,"feature_noise":0.4,"seed":5})";
    }
    return path;
}

CliConfig fast_config() {
    CliConfig c;
    c.synthetic_spec = small_spec_file();
    c.train.epochs = 5;
    c.train.hidden = 4;
    c.train.repeats = 2;
    c.train.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("cli_load_bundle validates its source flags") {
    CliConfig c;
    REQUIRE_THROWS_AS(cli_load_bundle(c), ConfigError);
    c.dataset_path = "somewhere";
    c.synthetic_spec = "default";
    REQUIRE_THROWS_AS(cli_load_bundle(c), ConfigError);
}

TEST_CASE("sbm spec files parse with defaults for missing keys") {
    const SbmSpec def = sbm_spec_from_json_file("default");
    REQUIRE(def.head_size == 300);
    const SbmSpec small = sbm_spec_from_json_file(small_spec_file());
    REQUIRE(small.head_size == 40);
    REQUIRE(small.num_classes == 3);
    REQUIRE_THROWS_AS(sbm_spec_from_json_file("/no/such/file.json"), ConfigError);
}

TEST_CASE("run_stats reports the dataset header and enrichment block") {
    CliConfig c = fast_config();
    std::ostringstream out;
    Json doc = run_stats(c, out);
    REQUIRE(doc["command"] == "stats");
    REQUIRE(doc["dataset"]["num_nodes"] == 40 + 16 + 7);
    REQUIRE(doc["dataset"]["num_classes"] == 3);
    REQUIRE(doc["enrichment"].contains("degree"));
    REQUIRE(doc["enrichment"].contains("eigen"));
    REQUIRE(doc["enrichment"].contains("id"));
    REQUIRE(out.str().find("R_imb") != std::string::npos);
}

TEST_CASE("run_train emits a results document with recomputable aggregates") {
    CliConfig c = fast_config();
    std::ostringstream out;
    Json doc = run_train(c, out);
    REQUIRE(doc["schema_version"] == 1);
    REQUIRE(doc["results"]["runs"].size() == 2);

    for (const char* metric : {"all", "low", "auc", "f1"}) {
        double mean = 0.0;
        for (const auto& run : doc["results"]["runs"])
            mean += run["metrics"][metric].get<double>();
        mean /= doc["results"]["runs"].size();
        double dev = 0.0;
        for (const auto& run : doc["results"]["runs"]) {
            const double v = run["metrics"][metric].get<double>() - mean;
            dev += v * v;
        }
        dev = std::sqrt(dev / doc["results"]["runs"].size());
        REQUIRE(std::abs(doc["results"]["aggregate"][metric]["mean"].get<double>() - mean) <
                1e-12);
        REQUIRE(std::abs(doc["results"]["aggregate"][metric]["dev"].get<double>() - dev) <
                1e-12);
    }
    // timing is excluded unless requested, keeping documents reproducible
    REQUIRE(doc["timing_seconds"].is_null());
    for (const auto& run : doc["results"]["runs"]) REQUIRE(run["epochs"] == 5);
}

TEST_CASE("environment variables override flags through the real binary") {
    const std::string out =
        (fs::temp_directory_path() / "graffin_env_test.json").string();
    const std::string cmd = std::string("GRAFFIN_EPOCHS=3 GRAFFIN_HIDDEN=4 ") +
                            GRAFFIN_CLI_PATH + " train --synthetic " + small_spec_file() +
                            " --repeats 1 --out " + out + " > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream in(out);
    Json doc;
    in >> doc;
    fs::remove(out);
    REQUIRE(doc["config"]["epochs"] == 3);
    REQUIRE(doc["config"]["hidden"] == 4);
    REQUIRE(doc["results"]["runs"][0]["epochs"] == 3);
}

TEST_CASE("run_train documents are byte-stable for identical configs") {
    CliConfig c = fast_config();
    std::ostringstream o1, o2;
    const std::string a = run_train(c, o1).dump(2);
    const std::string b = run_train(c, o2).dump(2);
    REQUIRE(a == b);
}

TEST_CASE("run_compare with the all-ones stub produces zero deltas") {
    CliConfig c = fast_config();
    c.hg_stub_ones = true;
    std::ostringstream out;
    Json doc = run_compare(c, out);
    REQUIRE(doc["delta"]["all"].get<double>() == 0.0);
    REQUIRE(doc["delta"]["low"].get<double>() == 0.0);
    REQUIRE(doc["delta"]["auc"].get<double>() == 0.0);
    REQUIRE(doc["delta"]["f1"].get<double>() == 0.0);
}

TEST_CASE("run_ablate deltas vanish when every strategy ties to identity order") {
    // regular ring: equal degrees and uniform eigen scores, so degree, eigen
    // and id all serialize to the identity order
    const int n = 12;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i % 2;
    Mat feats(n, 3);
    Rng rng(8);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) feats(i, j) = rng.uniform(-1, 1);
    DatasetBundle b;
    b.graph = build_graph(edges, feats, labels);
    SplitResult s = split(b.graph, {0.6, 0.2, 0.2}, 4);
    b.train_mask = s.train;
    b.val_mask = s.val;
    b.test_mask = s.test;
    b.name = "ring";

    const std::string dir = (fs::temp_directory_path() / "graffin_ring").string();
    save_native(b, dir);
    CliConfig c;
    c.dataset_path = dir;
    c.train.epochs = 6;
    c.train.hidden = 4;
    c.train.repeats = 2;
    std::ostringstream out;
    Json doc = run_ablate(c, out);
    fs::remove_all(dir);

    REQUIRE(doc["rows"].size() == 3);
    REQUIRE(doc["rows"][0]["strategy"] == "degree");
    REQUIRE(doc["rows"][0]["relative_f1"].is_null());
    for (int i : {1, 2}) REQUIRE(doc["rows"][i]["relative_f1"].get<double>() == 0.0);
}

TEST_CASE("run_perclass orders classes head to tail and matches train output") {
    CliConfig c = fast_config();
    std::ostringstream out;
    Json doc = run_perclass(c, out);
    const auto& counts = doc["counts"];
    REQUIRE(counts.size() == 3);
    for (std::size_t i = 0; i + 1 < counts.size(); ++i)
        REQUIRE(counts[i].get<long>() >= counts[i + 1].get<long>());

    // cross-module consistency: the graffin column equals the per_class block
    // of an identically configured train run
    CliConfig t = fast_config();
    t.train.graffin_enabled = true;
    std::ostringstream out2;
    Json train_doc = run_train(t, out2);
    REQUIRE(doc["graffin_accuracy_mean"] == train_doc["per_class"]["accuracy_mean"]);
    REQUIRE(doc["class_order"] == train_doc["per_class"]["class_order"]);

    // CSV header goes to the human stream
    REQUIRE(out.str().rfind("class,count,", 0) == 0);
}

TEST_CASE("invalid configs never produce output files") {
    CliConfig c = fast_config();
    c.train.epochs = 0;
    c.out_file = (fs::temp_directory_path() / "graffin_should_not_exist.json").string();
    std::ostringstream out;
    REQUIRE_THROWS_AS(run_train(c, out), ConfigError);
    REQUIRE_FALSE(fs::exists(c.out_file));
}

TEST_CASE("out files are written atomically and parse back") {
    CliConfig c = fast_config();
    c.out_file = (fs::temp_directory_path() / "graffin_out_test.json").string();
    std::ostringstream out;
    Json doc = run_train(c, out);
    std::ifstream in(c.out_file);
    REQUIRE(in.good());
    Json parsed;
    in >> parsed;
    REQUIRE(parsed == doc);
    fs::remove(c.out_file);
    REQUIRE_FALSE(fs::exists(c.out_file + ".tmp"));
}

TEST_CASE("gen-synthetic writes a loadable native directory") {
    CliConfig c;
    c.synthetic_spec = small_spec_file();
    c.gen_out_dir = (fs::temp_directory_path() / "graffin_gen_test").string();
    std::ostringstream out;
    Json doc = run_gen_synthetic(c, out);
    REQUIRE(doc["command"] == "gen-synthetic");
    DatasetBundle b = load_native(c.gen_out_dir);
    REQUIRE(b.graph.num_nodes == doc["dataset"]["num_nodes"].get<int>());
    fs::remove_all(c.gen_out_dir);
}
