#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "graffin/metrics.hpp"
#include "graffin/rng.hpp"
#include "oracles.hpp"

using namespace graffin;
using graffin_tests::brute_force_auc_macro;
using graffin_tests::brute_force_macro_f1;

namespace {

struct RandomInstance {
    Mat probs;  // row-stochastic
    std::vector<int> truth;
    std::vector<int> pred;
    std::vector<int> mask;
    int num_classes;
};

RandomInstance random_instance(Rng& rng, int max_n = 200, int max_k = 6) {
    RandomInstance inst;
    const int n = 5 + rng.uniform_int(max_n - 5);
    inst.num_classes = 2 + rng.uniform_int(max_k - 2);
    Mat logits(n, inst.num_classes);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < inst.num_classes; ++j) {
            logits(i, j) = rng.uniform(-2.0, 2.0);
            // quantize some entries so score ties actually occur
            if (rng.bernoulli(0.3)) logits(i, j) = std::round(logits(i, j) * 4.0) / 4.0;
        }
    inst.probs = softmax_rows(logits);
    inst.pred = argmax_rows(inst.probs);
    for (int i = 0; i < n; ++i) inst.truth.push_back(rng.uniform_int(inst.num_classes));
    for (int i = 0; i < n; ++i)
        if (rng.bernoulli(0.7)) inst.mask.push_back(i);
    if (inst.mask.empty()) inst.mask.push_back(0);
    return inst;
}

}  // namespace

TEST_CASE("overall accuracy enumeration") {
    const std::vector<int> truth = {0, 1, 2, 1};
    REQUIRE(overall_accuracy({0, 1, 2, 1}, truth, {0, 1, 2, 3}) == 1.0);
    REQUIRE(overall_accuracy({1, 0, 0, 0}, truth, {0, 1, 2, 3}) == 0.0);
    REQUIRE(overall_accuracy({0, 1, 2, 0}, truth, {0, 1, 2, 3}) == Catch::Approx(0.75));
    REQUIRE_THROWS_AS(overall_accuracy({0}, {0}, {}), InputError);
}

TEST_CASE("tail accuracy enumeration and sentinel") {
    const std::vector<int> truth = {1, 1, 1, 1, 1, 0};
    REQUIRE(tail_accuracy({1, 1, 1, 1, 1, 0}, truth, {0, 1, 2, 3, 4, 5}, 1) == 1.0);
    REQUIRE(tail_accuracy({0, 0, 0, 0, 0, 0}, truth, {0, 1, 2, 3, 4, 5}, 1) == 0.0);
    REQUIRE(tail_accuracy({1, 1, 0, 0, 0, 0}, truth, {0, 1, 2, 3, 4, 5}, 1) ==
            Catch::Approx(0.4));
    // no tail node in the mask -> undefined
    REQUIRE(std::isnan(tail_accuracy({0}, truth, {5}, 1)));
}

TEST_CASE("macro F1 closed forms") {
    SECTION("perfect predictions give 1") {
        REQUIRE(macro_f1({0, 1, 2}, {0, 1, 2}, {0, 1, 2}, 3) == 1.0);
    }
    SECTION("symmetric binary confusion gives 0.5") {
        // per class: TP=1, FP=1, FN=1 -> F1 = 0.5
        const std::vector<int> truth = {0, 0, 1, 1};
        const std::vector<int> pred = {0, 1, 0, 1};
        REQUIRE(macro_f1(pred, truth, {0, 1, 2, 3}, 2) == Catch::Approx(0.5));
    }
    SECTION("a class absent and never predicted is vacuous and contributes 1") {
        const std::vector<int> truth = {0, 0};
        const std::vector<int> pred = {0, 0};
        REQUIRE(macro_f1(pred, truth, {0, 1}, 2) == Catch::Approx(1.0));
    }
}

TEST_CASE("binary AUC basics") {
    SECTION("perfect separation") {
        REQUIRE(auc_binary({0.9, 0.8, 0.2, 0.1}, {true, true, false, false}) == 1.0);
    }
    SECTION("identical scores give 0.5 under midranks") {
        REQUIRE(auc_binary({0.3, 0.3, 0.3, 0.3}, {true, false, true, false}) ==
                Catch::Approx(0.5));
    }
    SECTION("three of four concordant pairs") {
        // pos {0.9, 0.4}, neg {0.5, 0.1}: concordant 3, discordant 1
        REQUIRE(auc_binary({0.9, 0.4, 0.5, 0.1}, {true, true, false, false}) ==
                Catch::Approx(0.75));
    }
}

TEST_CASE("macro AUC sentinel when no class has both sides") {
    Mat probs(2, 2);
    probs << 0.6, 0.4, 0.7, 0.3;
    std::vector<int> skipped;
    const double a = auc_roc_macro(probs, {0, 0}, {0, 1}, 2, &skipped);
    REQUIRE(std::isnan(a));
    REQUIRE(skipped == std::vector<int>{0, 1});
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
    Rng rng(31);
    RandomInstance inst = random_instance(rng);
    const double base = auc_roc_macro(inst.probs, inst.truth, inst.mask, inst.num_classes);
    Mat warped = inst.probs;
    for (int i = 0; i < warped.rows(); ++i)
        for (int j = 0; j < warped.cols(); ++j)
            warped(i, j) = std::exp(3.0 * warped(i, j)) + 2.0;
    const double after = auc_roc_macro(warped, inst.truth, inst.mask, inst.num_classes);
    REQUIRE(after == Catch::Approx(base).epsilon(1e-12));
}

TEST_CASE("metrics match brute-force oracles on random instances") {
    Rng rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        RandomInstance inst = random_instance(rng);
        const double f1 = macro_f1(inst.pred, inst.truth, inst.mask, inst.num_classes);
        const double f1_oracle =
            brute_force_macro_f1(inst.pred, inst.truth, inst.mask, inst.num_classes);
        REQUIRE(std::abs(f1 - f1_oracle) < 1e-12);

        const double auc = auc_roc_macro(inst.probs, inst.truth, inst.mask, inst.num_classes);
        const double auc_oracle =
            brute_force_auc_macro(inst.probs, inst.truth, inst.mask, inst.num_classes);
        if (std::isnan(auc_oracle)) {
            REQUIRE(std::isnan(auc));
        } else {
            REQUIRE(std::abs(auc - auc_oracle) < 1e-12);
        }
    }
}

TEST_CASE("metrics are invariant under node permutation") {
    Rng rng(23);
    RandomInstance inst = random_instance(rng, 60);
    const int n = static_cast<int>(inst.truth.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    Mat probs2(n, inst.num_classes);
    std::vector<int> truth2(n), pred2(n);
    for (int i = 0; i < n; ++i) {
        probs2.row(perm[i]) = inst.probs.row(i);
        truth2[perm[i]] = inst.truth[i];
        pred2[perm[i]] = inst.pred[i];
    }
    std::vector<int> mask2;
    for (int i : inst.mask) mask2.push_back(perm[i]);
    std::sort(mask2.begin(), mask2.end());

    REQUIRE(overall_accuracy(pred2, truth2, mask2) ==
            overall_accuracy(inst.pred, inst.truth, inst.mask));
    REQUIRE(macro_f1(pred2, truth2, mask2, inst.num_classes) ==
            Catch::Approx(macro_f1(inst.pred, inst.truth, inst.mask, inst.num_classes))
                .epsilon(1e-14));
    REQUIRE(auc_roc_macro(probs2, truth2, mask2, inst.num_classes) ==
            Catch::Approx(auc_roc_macro(inst.probs, inst.truth, inst.mask, inst.num_classes))
                .epsilon(1e-14));
}

TEST_CASE("accuracy and macro F1 hit 1 together exactly on perfect predictions") {
    Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        RandomInstance inst = random_instance(rng, 40);
        const double acc = overall_accuracy(inst.pred, inst.truth, inst.mask);
        const double f1 = macro_f1(inst.pred, inst.truth, inst.mask, inst.num_classes);
        REQUIRE((acc == 1.0) == (f1 == 1.0));
    }
    // and a constructed perfect case
    REQUIRE(overall_accuracy({2, 0, 1}, {2, 0, 1}, {0, 1, 2}) == 1.0);
    REQUIRE(macro_f1({2, 0, 1}, {2, 0, 1}, {0, 1, 2}, 3) == 1.0);
}

TEST_CASE("argmax breaks ties toward the smallest class id") {
    Mat logits(2, 3);
    logits << 1.0, 1.0, 0.5, 0.2, 0.9, 0.9;
    const std::vector<int> p = argmax_rows(logits);
    REQUIRE(p == std::vector<int>{0, 1});
}

TEST_CASE("aggregate mean and population deviation") {
    const std::vector<double> single = {0.42};
    Aggregate a = aggregate(single);
    REQUIRE(a.mean == Catch::Approx(0.42));
    REQUIRE(a.dev == 0.0);

    const std::vector<double> pair = {88.0, 90.0};
    Aggregate b = aggregate(pair);
    REQUIRE(b.mean == Catch::Approx(89.0));
    REQUIRE(b.dev == Catch::Approx(1.0));
    REQUIRE(format_mean_dev(b.mean, b.dev) == "89.0^1.0");

    const std::vector<double> wide = {80.0, 90.0};
    Aggregate c = aggregate(wide);
    REQUIRE(format_mean_dev(c.mean, c.dev) == "85.0^5.0");

    const std::vector<double> same = {3.0, 3.0, 3.0};
    REQUIRE(aggregate(same).dev == 0.0);
}

TEST_CASE("per-class accuracy lines up with tail accuracy") {
    const std::vector<int> truth = {0, 0, 1, 1, 1};
    const std::vector<int> pred = {0, 1, 1, 1, 0};
    const std::vector<int> mask = {0, 1, 2, 3, 4};
    const auto pca = per_class_accuracy(pred, truth, mask, 2);
    REQUIRE(pca[0] == Catch::Approx(0.5));
    REQUIRE(pca[1] == Catch::Approx(2.0 / 3.0));
    REQUIRE(tail_accuracy(pred, truth, mask, 1) == Catch::Approx(pca[1]));
}
