#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "envsense/features.hpp"

namespace envsense {

// Which feature columns a matrix carries.
enum class FeatureMask : std::uint8_t { AccelOnly, EnvOnly, Fused };

std::string_view mask_name(FeatureMask mask);
std::optional<FeatureMask> parse_mask(std::string_view name);
std::vector<Feature> mask_features(FeatureMask mask);

// Dense labeled matrix for training and evaluation. Rows missing a masked
// feature or a label are dropped at construction.
class FeatureMatrix {
public:
    static FeatureMatrix from_vectors(const std::vector<FeatureVector>& vectors, FeatureMask mask);

    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    FeatureMask mask() const { return mask_; }
    const std::vector<ActivityLabel>& classes() const { return classes_; }
    const std::vector<std::uint8_t>& labels() const { return labels_; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols(), cols()};
    }
    ActivityLabel class_of(std::size_t i) const { return classes_[labels_[i]]; }

    // Row subset preserving the class list and column layout.
    FeatureMatrix subset(std::span<const std::size_t> row_ids) const;

private:
    std::vector<std::string> feature_names_;
    FeatureMask mask_ = FeatureMask::Fused;
    std::vector<ActivityLabel> classes_;
    std::vector<double> data_;
    std::vector<std::uint8_t> labels_;
};

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct TreeParams {
    std::size_t max_depth = kUnlimitedDepth;
    std::size_t min_leaf = 1;
};

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = kUnlimitedDepth;
    std::size_t min_leaf = 1;
    std::size_t feature_subset = 0;  // 0 -> ceil(sqrt(feature count))
    bool bootstrap = true;
};

struct NaiveBayesModel {
    std::vector<std::string> feature_names;
    std::vector<ActivityLabel> classes;
    std::vector<double> log_prior;       // per class
    std::vector<double> mean, variance;  // class-major, classes x features

    std::uint8_t predict_row(std::span<const double> row) const;
};

struct DecisionTreeModel {
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;     // value < threshold goes left
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint8_t leaf_class = 0;
    };
    std::vector<std::string> feature_names;
    std::vector<ActivityLabel> classes;
    std::vector<Node> nodes;

    std::uint8_t predict_row(std::span<const double> row) const;
    std::size_t depth() const;
};

struct RandomForestModel {
    std::vector<std::string> feature_names;
    std::vector<ActivityLabel> classes;
    std::vector<DecisionTreeModel> trees;

    std::uint8_t predict_row(std::span<const double> row) const;
};

// Per-class priors and per-feature Gaussians; variances are floored at
// `variance_floor` to guard single-valued features. Throws TrainingError when
// fewer than two classes are present or a class has fewer than two rows.
NaiveBayesModel train_naive_bayes(const FeatureMatrix& matrix, double variance_floor = 1e-9);

// Greedy binary CART maximizing information gain (entropy); splits continue
// while a node is impure and a valid split exists, so zero-gain splits are
// taken. Ties break toward the lower feature index, then lower threshold;
// leaves predict the majority class with ties toward the lower class index.
DecisionTreeModel train_decision_tree(const FeatureMatrix& matrix, TreeParams params = {});

// Bagged trees on bootstrap resamples with a fresh random feature subset per
// split; majority vote with ties toward the lower class index. Deterministic
// given the seed: every tree draws from its own substream.
RandomForestModel train_random_forest(const FeatureMatrix& matrix, ForestParams params,
                                      std::uint64_t seed);

struct ModelSpec {
    enum class Kind : std::uint8_t { NaiveBayes, DecisionTree, RandomForest };
    Kind kind = Kind::RandomForest;
    TreeParams tree;
    ForestParams forest;

    std::string_view name() const;
};

std::optional<ModelSpec::Kind> parse_model_kind(std::string_view name);

// Type-erased trained classifier.
class Model {
public:
    explicit Model(NaiveBayesModel m) : impl_(std::move(m)) {}
    explicit Model(DecisionTreeModel m) : impl_(std::move(m)) {}
    explicit Model(RandomForestModel m) : impl_(std::move(m)) {}

    const std::vector<std::string>& feature_names() const;
    const std::vector<ActivityLabel>& classes() const;

    ActivityLabel predict_row(std::span<const double> row) const;
    // Throws FeatureError when the matrix columns differ from the model's.
    std::vector<ActivityLabel> predict(const FeatureMatrix& matrix) const;
    // Throws FeatureError when a required feature is absent from the vector.
    ActivityLabel predict_vector(const FeatureVector& fv) const;

private:
    std::variant<NaiveBayesModel, DecisionTreeModel, RandomForestModel> impl_;
};

Model train(const FeatureMatrix& matrix, const ModelSpec& spec, std::uint64_t seed);

struct ConfusionMatrix {
    std::vector<ActivityLabel> classes;
    std::vector<std::vector<std::size_t>> counts;  // rows = truth, columns = prediction

    std::size_t total() const;
    std::size_t trace() const;
    double accuracy() const { return static_cast<double>(trace()) / static_cast<double>(total()); }
};

// counts[i][j] = occurrences of (truth = classes[i], predicted = classes[j]).
// Throws InputError on length mismatch or a label outside `classes`.
ConfusionMatrix confusion(std::span<const ActivityLabel> truth,
                          std::span<const ActivityLabel> predicted,
                          std::vector<ActivityLabel> classes);

struct CVReport {
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    ConfusionMatrix matrix;  // aggregated over all held-out predictions
    ModelSpec spec;
    FeatureMask mask = FeatureMask::Fused;
    std::uint64_t seed = 0;
};

// Seeded stratified fold assignment (one fold id per row). Throws FoldError
// when any class has fewer rows than folds.
std::vector<std::size_t> stratified_folds(const FeatureMatrix& matrix, std::size_t folds,
                                          std::uint64_t seed);

CVReport cross_validate(const FeatureMatrix& matrix, const ModelSpec& spec, std::size_t folds,
                        std::uint64_t seed);

// Same protocol with a caller-supplied fold assignment.
CVReport cross_validate(const FeatureMatrix& matrix, const ModelSpec& spec,
                        const std::vector<std::size_t>& fold_of_row, std::size_t folds,
                        std::uint64_t seed);

}  // namespace envsense
