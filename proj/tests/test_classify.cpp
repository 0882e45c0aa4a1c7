#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "envsense/classify.hpp"
#include "envsense/rng.hpp"

using namespace envsense;

namespace {

FeatureVector accel_vector(ActivityLabel label, double x, double y, double z) {
    FeatureVector fv;
    fv.label = label;
    fv.accel_sd_x = x;
    fv.accel_sd_y = y;
    fv.accel_sd_z = z;
    return fv;
}

// Three Gaussian blobs in accel space, `per_class` rows each.
std::vector<FeatureVector> blob_vectors(std::size_t per_class, std::uint64_t seed) {
    const ActivityLabel labels[] = {ActivityLabel::ClimbStairs, ActivityLabel::WalkIndoor,
                                    ActivityLabel::SitLab};
    const double centers[][3] = {{0.0, 0.0, 0.0}, {3.0, 3.0, 0.0}, {0.0, 6.0, 6.0}};
    std::mt19937_64 engine = rng::make_engine(seed);
    std::vector<FeatureVector> out;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < per_class; ++i)
            out.push_back(accel_vector(labels[c],
                                       rng::gaussian(engine, centers[c][0], 0.4),
                                       rng::gaussian(engine, centers[c][1], 0.4),
                                       rng::gaussian(engine, centers[c][2], 0.4)));
    return out;
}

std::vector<ActivityLabel> predict_all(const Model& model, const FeatureMatrix& matrix) {
    return model.predict(matrix);
}

double resubstitution_accuracy(const Model& model, const FeatureMatrix& matrix) {
    auto predicted = predict_all(model, matrix);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < matrix.rows(); ++i)
        if (predicted[i] == matrix.class_of(i)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(matrix.rows());
}

}  // namespace

TEST_CASE("feature masks select the documented columns") {
    CHECK(mask_features(FeatureMask::AccelOnly) ==
          std::vector<Feature>{Feature::AccelSdX, Feature::AccelSdY, Feature::AccelSdZ});
    CHECK(mask_features(FeatureMask::EnvOnly) ==
          std::vector<Feature>{Feature::TempGradient, Feature::TempSd, Feature::HumiditySd,
                               Feature::LightLr, Feature::DtwDist});
    CHECK(mask_features(FeatureMask::Fused).size() == kFeatureCount);

    for (FeatureMask m : {FeatureMask::AccelOnly, FeatureMask::EnvOnly, FeatureMask::Fused})
        CHECK(parse_mask(mask_name(m)) == m);
    CHECK(!parse_mask("audio").has_value());
}

TEST_CASE("matrix construction drops incomplete or unlabeled rows, classes in enum order") {
    std::vector<FeatureVector> vectors;
    vectors.push_back(accel_vector(ActivityLabel::Rest, 1, 2, 3));
    vectors.push_back(accel_vector(ActivityLabel::ClimbStairs, 4, 5, 6));

    FeatureVector unlabeled = accel_vector(ActivityLabel::Rest, 7, 8, 9);
    unlabeled.label.reset();
    vectors.push_back(unlabeled);

    FeatureVector incomplete = accel_vector(ActivityLabel::Rest, 1, 2, 3);
    incomplete.accel_sd_z.reset();
    vectors.push_back(incomplete);

    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.classes() ==
          std::vector<ActivityLabel>{ActivityLabel::ClimbStairs, ActivityLabel::Rest});
    CHECK(m.class_of(0) == ActivityLabel::Rest);
    CHECK(m.row(1)[0] == 4.0);

    const std::size_t ids[] = {1};
    FeatureMatrix sub = m.subset(ids);
    CHECK(sub.rows() == 1);
    CHECK(sub.classes() == m.classes());  // class list survives even one-class subsets
}

TEST_CASE("naive Bayes separates well-separated classes and guards degeneracy") {
    auto vectors = blob_vectors(30, 21);
    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);
    NaiveBayesModel nb = train_naive_bayes(m);
    CHECK(resubstitution_accuracy(Model(nb), m) == 1.0);
    CHECK(nb.classes.size() == 3);
    CHECK(nb.log_prior[0] == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));

    SUBCASE("duplicated rows floor the variance instead of dividing by zero") {
        std::vector<FeatureVector> flat;
        for (int i = 0; i < 3; ++i) flat.push_back(accel_vector(ActivityLabel::Rest, 1, 1, 1));
        for (int i = 0; i < 3; ++i) flat.push_back(accel_vector(ActivityLabel::SitLab, 2, 2, 2));
        FeatureMatrix fm = FeatureMatrix::from_vectors(flat, FeatureMask::AccelOnly);
        NaiveBayesModel model = train_naive_bayes(fm);
        for (double v : model.variance) CHECK(v >= 1e-9);
        CHECK(resubstitution_accuracy(Model(model), fm) == 1.0);
    }
    SUBCASE("a class with one row is rejected") {
        std::vector<FeatureVector> rows;
        rows.push_back(accel_vector(ActivityLabel::Rest, 1, 1, 1));
        rows.push_back(accel_vector(ActivityLabel::Rest, 1.1, 1, 1));
        rows.push_back(accel_vector(ActivityLabel::SitLab, 2, 2, 2));
        FeatureMatrix fm = FeatureMatrix::from_vectors(rows, FeatureMask::AccelOnly);
        CHECK_THROWS_AS(train_naive_bayes(fm), TrainingError);
    }
    SUBCASE("fewer than two classes is rejected") {
        std::vector<FeatureVector> rows;
        rows.push_back(accel_vector(ActivityLabel::Rest, 1, 1, 1));
        rows.push_back(accel_vector(ActivityLabel::Rest, 1.1, 1, 1));
        FeatureMatrix fm = FeatureMatrix::from_vectors(rows, FeatureMask::AccelOnly);
        CHECK_THROWS_AS(train_naive_bayes(fm), TrainingError);
    }
}

TEST_CASE("decision tree handles the canonical shapes") {
    SUBCASE("single class collapses to one leaf") {
        std::vector<FeatureVector> rows;
        for (int i = 0; i < 4; ++i)
            rows.push_back(accel_vector(ActivityLabel::Rest, i, 0, 0));
        FeatureMatrix m = FeatureMatrix::from_vectors(rows, FeatureMask::AccelOnly);
        DecisionTreeModel tree = train_decision_tree(m);
        CHECK(tree.nodes.size() == 1);
        CHECK(tree.depth() == 0);
        CHECK(tree.classes[tree.predict_row(m.row(0))] == ActivityLabel::Rest);
    }
    SUBCASE("separable 1-feature data splits at the straddling midpoint") {
        std::vector<FeatureVector> rows;
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 4.0, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 4.5, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 5.5, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 6.0, 0, 0));
        FeatureMatrix m = FeatureMatrix::from_vectors(rows, FeatureMask::AccelOnly);
        DecisionTreeModel tree = train_decision_tree(m);
        CHECK(tree.depth() == 1);
        CHECK(tree.nodes[0].feature == 0);
        CHECK(tree.nodes[0].threshold == 5.0);
        CHECK(resubstitution_accuracy(Model(tree), m) == 1.0);
    }
    SUBCASE("XOR needs zero-gain splits and two levels") {
        std::vector<FeatureVector> rows;
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 0, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 1, 1, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 0, 1, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 1, 0, 0));
        FeatureMatrix m = FeatureMatrix::from_vectors(rows, FeatureMask::AccelOnly);
        DecisionTreeModel tree = train_decision_tree(m);
        CHECK(tree.depth() == 2);
        CHECK(resubstitution_accuracy(Model(tree), m) == 1.0);
        CHECK(tree.nodes[0].feature == 0);  // tied gains break toward feature 0
    }
    SUBCASE("max_depth forces a majority leaf with low-index tie-break") {
        std::vector<FeatureVector> rows;
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 1, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 2, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 3, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 4, 0, 0));
        FeatureMatrix m = FeatureMatrix::from_vectors(rows, FeatureMask::AccelOnly);
        DecisionTreeModel stump = train_decision_tree(m, {0, 1});
        REQUIRE(stump.nodes.size() == 1);
        CHECK(stump.classes[stump.nodes[0].leaf_class] == ActivityLabel::ClimbStairs);
    }
    SUBCASE("min_leaf blocks splits that would isolate too few rows") {
        std::vector<FeatureVector> rows;
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 1, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::ClimbStairs, 2, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 3, 0, 0));
        rows.push_back(accel_vector(ActivityLabel::TakeElevator, 4, 0, 0));
        FeatureMatrix m = FeatureMatrix::from_vectors(rows, FeatureMask::AccelOnly);
        DecisionTreeModel tree = train_decision_tree(m, {kUnlimitedDepth, 3});
        CHECK(tree.nodes.size() == 1);
        DecisionTreeModel split = train_decision_tree(m, {kUnlimitedDepth, 2});
        CHECK(split.depth() == 1);
    }
}

TEST_CASE("deep tree memorizes conflict-free training data") {
    auto vectors = blob_vectors(25, 31);
    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);
    DecisionTreeModel tree = train_decision_tree(m);
    CHECK(resubstitution_accuracy(Model(tree), m) == 1.0);
}

TEST_CASE("degenerate forest reproduces the plain tree") {
    auto vectors = blob_vectors(20, 41);
    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);

    ForestParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    params.feature_subset = m.cols();
    RandomForestModel forest = train_random_forest(m, params, 77);
    DecisionTreeModel tree = train_decision_tree(m);

    for (std::size_t i = 0; i < m.rows(); ++i)
        CHECK(forest.predict_row(m.row(i)) == tree.predict_row(m.row(i)));
}

TEST_CASE("forest training is deterministic per seed") {
    auto vectors = blob_vectors(20, 51);
    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);
    ForestParams params;
    params.n_trees = 12;

    RandomForestModel f1 = train_random_forest(m, params, 5);
    RandomForestModel f2 = train_random_forest(m, params, 5);
    REQUIRE(f1.trees.size() == 12);
    for (std::size_t t = 0; t < f1.trees.size(); ++t) {
        REQUIRE(f1.trees[t].nodes.size() == f2.trees[t].nodes.size());
        for (std::size_t n = 0; n < f1.trees[t].nodes.size(); ++n) {
            CHECK(f1.trees[t].nodes[n].feature == f2.trees[t].nodes[n].feature);
            CHECK(f1.trees[t].nodes[n].threshold == f2.trees[t].nodes[n].threshold);
        }
    }
    for (std::size_t i = 0; i < m.rows(); ++i)
        CHECK(f1.predict_row(m.row(i)) == f2.predict_row(m.row(i)));
}

TEST_CASE("prediction rejects mismatched inputs") {
    auto vectors = blob_vectors(10, 61);
    FeatureMatrix accel = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);
    Model model = train(accel, ModelSpec{ModelSpec::Kind::NaiveBayes, {}, {}}, 1);

    std::vector<FeatureVector> fused_vectors;
    for (auto fv : vectors) {
        fv.temp_gradient = 0.0;
        fv.temp_sd = 0.1;
        fv.humidity_sd = 0.1;
        fv.light_lr = 0.0;
        fv.dtw_dist = 1.0;
        fused_vectors.push_back(fv);
    }
    FeatureMatrix fused = FeatureMatrix::from_vectors(fused_vectors, FeatureMask::Fused);
    CHECK_THROWS_AS(model.predict(fused), FeatureError);

    FeatureVector missing = accel_vector(ActivityLabel::Rest, 1, 2, 3);
    missing.accel_sd_z.reset();
    CHECK_THROWS_AS(model.predict_vector(missing), FeatureError);

    FeatureVector complete = vectors[0];
    CHECK(model.predict_vector(complete) == ActivityLabel::ClimbStairs);
}

TEST_CASE("confusion counts truth rows against prediction columns") {
    using L = ActivityLabel;
    const std::vector<L> classes = {L::ClimbStairs, L::TakeElevator};

    const std::vector<L> truth = {L::ClimbStairs, L::ClimbStairs, L::TakeElevator};
    const std::vector<L> pred = {L::ClimbStairs, L::TakeElevator, L::TakeElevator};
    ConfusionMatrix cm = confusion(truth, pred, classes);
    CHECK(cm.counts[0] == std::vector<std::size_t>{1, 1});
    CHECK(cm.counts[1] == std::vector<std::size_t>{0, 1});
    CHECK(cm.total() == 3);
    CHECK(cm.trace() == 2);
    CHECK(cm.accuracy() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    ConfusionMatrix perfect = confusion(truth, truth, classes);
    CHECK(perfect.accuracy() == 1.0);
    CHECK(perfect.counts[0][1] == 0);

    const std::vector<L> shorter = {L::ClimbStairs};
    CHECK_THROWS_AS(confusion(truth, shorter, classes), InputError);
    const std::vector<L> outside = {L::Rest, L::Rest, L::Rest};
    CHECK_THROWS_AS(confusion(truth, outside, classes), InputError);
}

TEST_CASE("stratified folds cover every class evenly") {
    auto vectors = blob_vectors(25, 71);
    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);

    auto folds = stratified_folds(m, 5, 3);
    REQUIRE(folds.size() == m.rows());
    // per class, fold occupancy differs by at most one
    for (std::size_t c = 0; c < m.classes().size(); ++c) {
        std::array<std::size_t, 5> occupancy{};
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (m.labels()[i] == static_cast<std::uint8_t>(c)) ++occupancy[folds[i]];
        auto [lo, hi] = std::minmax_element(occupancy.begin(), occupancy.end());
        CHECK(*hi - *lo <= 1);
    }
    CHECK(stratified_folds(m, 5, 3) == folds);
    CHECK(stratified_folds(m, 5, 4) != folds);

    CHECK_THROWS_AS(stratified_folds(m, 26, 3), FoldError);
    CHECK_THROWS_AS(stratified_folds(m, 1, 3), FoldError);
}

TEST_CASE("cross-validation satisfies the counting identities") {
    auto vectors = blob_vectors(30, 81);
    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);

    for (ModelSpec::Kind kind : {ModelSpec::Kind::NaiveBayes, ModelSpec::Kind::DecisionTree,
                                 ModelSpec::Kind::RandomForest}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.forest.n_trees = 15;
        CVReport report = cross_validate(m, spec, 5, 13);

        CHECK(report.fold_accuracies.size() == 5);
        CHECK(report.matrix.total() == m.rows());
        for (std::size_t c = 0; c < m.classes().size(); ++c) {
            std::size_t class_rows = 0;
            for (std::size_t i = 0; i < m.rows(); ++i)
                if (m.labels()[i] == static_cast<std::uint8_t>(c)) ++class_rows;
            std::size_t row_sum = std::accumulate(report.matrix.counts[c].begin(),
                                                  report.matrix.counts[c].end(), 0ull);
            CHECK(row_sum == class_rows);
        }
        double mean = std::accumulate(report.fold_accuracies.begin(),
                                      report.fold_accuracies.end(), 0.0) /
                      5.0;
        CHECK(report.mean_accuracy == doctest::Approx(mean).epsilon(1e-12));
        CHECK(std::abs(report.matrix.accuracy() -
                       static_cast<double>(report.matrix.trace()) /
                           static_cast<double>(report.matrix.total())) <= 1e-12);

        CVReport again = cross_validate(m, spec, 5, 13);
        CHECK(again.matrix.counts == report.matrix.counts);
        CHECK(again.fold_accuracies == report.fold_accuracies);
    }
}

TEST_CASE("row order does not change cross-validation when folds follow row identity") {
    auto vectors = blob_vectors(20, 91);
    FeatureMatrix original = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);
    auto folds = stratified_folds(original, 4, 17);

    std::vector<std::size_t> perm(vectors.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 engine = rng::make_engine(2024);
    rng::shuffle(perm, engine);

    std::vector<FeatureVector> shuffled;
    std::vector<std::size_t> shuffled_folds;
    for (std::size_t j : perm) {
        shuffled.push_back(vectors[j]);
        shuffled_folds.push_back(folds[j]);
    }
    FeatureMatrix permuted = FeatureMatrix::from_vectors(shuffled, FeatureMask::AccelOnly);

    for (ModelSpec::Kind kind : {ModelSpec::Kind::NaiveBayes, ModelSpec::Kind::DecisionTree,
                                 ModelSpec::Kind::RandomForest}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.forest.n_trees = 15;
        CVReport r1 = cross_validate(original, spec, folds, 4, 17);
        CVReport r2 = cross_validate(permuted, spec, shuffled_folds, 4, 17);
        CHECK(r1.matrix.accuracy() == r2.matrix.accuracy());
        CHECK(r1.matrix.counts == r2.matrix.counts);
    }
}

TEST_CASE("cross-validation input validation") {
    auto vectors = blob_vectors(6, 101);
    FeatureMatrix m = FeatureMatrix::from_vectors(vectors, FeatureMask::AccelOnly);
    ModelSpec spec;
    spec.kind = ModelSpec::Kind::NaiveBayes;

    CHECK_THROWS_AS(cross_validate(m, spec, 7, 1), FoldError);  // class smaller than k

    std::vector<std::size_t> bad_length(m.rows() - 1, 0);
    CHECK_THROWS_AS(cross_validate(m, spec, bad_length, 2, 1), FoldError);
    std::vector<std::size_t> out_of_range(m.rows(), 5);
    CHECK_THROWS_AS(cross_validate(m, spec, out_of_range, 2, 1), FoldError);
}

TEST_CASE("model specs expose parseable names") {
    CHECK(parse_model_kind("nb") == ModelSpec::Kind::NaiveBayes);
    CHECK(parse_model_kind("naive_bayes") == ModelSpec::Kind::NaiveBayes);
    CHECK(parse_model_kind("tree") == ModelSpec::Kind::DecisionTree);
    CHECK(parse_model_kind("decision_tree") == ModelSpec::Kind::DecisionTree);
    CHECK(parse_model_kind("forest") == ModelSpec::Kind::RandomForest);
    CHECK(parse_model_kind("random_forest") == ModelSpec::Kind::RandomForest);
    CHECK(!parse_model_kind("svm").has_value());

    ModelSpec spec;
    spec.kind = ModelSpec::Kind::DecisionTree;
    CHECK(spec.name() == "decision_tree");
}
