#include "envsense/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>

#include "envsense/error.hpp"
#include "envsense/rng.hpp"

namespace envsense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view mask_name(FeatureMask mask) {
    switch (mask) {
        case FeatureMask::AccelOnly: return "accel";
        case FeatureMask::EnvOnly: return "env";
        case FeatureMask::Fused: return "fused";
    }
    return "fused";
}

std::optional<FeatureMask> parse_mask(std::string_view name) {
    if (name == "accel") return FeatureMask::AccelOnly;
    if (name == "env") return FeatureMask::EnvOnly;
    if (name == "fused") return FeatureMask::Fused;
    return std::nullopt;
}

std::vector<Feature> mask_features(FeatureMask mask) {
    switch (mask) {
        case FeatureMask::AccelOnly:
            return {Feature::AccelSdX, Feature::AccelSdY, Feature::AccelSdZ};
        case FeatureMask::EnvOnly:
            return {Feature::TempGradient, Feature::TempSd, Feature::HumiditySd,
                    Feature::LightLr, Feature::DtwDist};
        case FeatureMask::Fused:
            return {Feature::TempGradient, Feature::TempSd,   Feature::HumiditySd,
                    Feature::AccelSdX,     Feature::AccelSdY, Feature::AccelSdZ,
                    Feature::LightLr,      Feature::DtwDist};
    }
    return {};
}

FeatureMatrix FeatureMatrix::from_vectors(const std::vector<FeatureVector>& vectors,
                                          FeatureMask mask) {
    FeatureMatrix m;
    m.mask_ = mask;
    const std::vector<Feature> feats = mask_features(mask);
    m.feature_names_.reserve(feats.size());
    for (Feature f : feats) m.feature_names_.emplace_back(feature_name(f));

    std::array<bool, kActivityCount> seen{};
    std::vector<std::size_t> kept;
    kept.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const FeatureVector& fv = vectors[i];
        if (!fv.label) continue;
        bool complete = true;
        for (Feature f : feats) {
            if (!fv.get(f)) {
                complete = false;
                break;
            }
        }
        if (!complete) continue;
        kept.push_back(i);
        seen[static_cast<std::size_t>(*fv.label)] = true;
    }

    for (std::size_t c = 0; c < kActivityCount; ++c)
        if (seen[c]) m.classes_.push_back(static_cast<ActivityLabel>(c));

    std::array<std::uint8_t, kActivityCount> index_of{};
    for (std::size_t k = 0; k < m.classes_.size(); ++k)
        index_of[static_cast<std::size_t>(m.classes_[k])] = static_cast<std::uint8_t>(k);

    m.data_.reserve(kept.size() * feats.size());
    m.labels_.reserve(kept.size());
    for (std::size_t i : kept) {
        const FeatureVector& fv = vectors[i];
        for (Feature f : feats) m.data_.push_back(*fv.get(f));
        m.labels_.push_back(index_of[static_cast<std::size_t>(*fv.label)]);
    }
    return m;
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> row_ids) const {
    FeatureMatrix m;
    m.feature_names_ = feature_names_;
    m.mask_ = mask_;
    m.classes_ = classes_;
    m.data_.reserve(row_ids.size() * cols());
    m.labels_.reserve(row_ids.size());
    for (std::size_t r : row_ids) {
        if (r >= rows()) throw InputError("row index out of range in subset");
        auto rv = row(r);
        m.data_.insert(m.data_.end(), rv.begin(), rv.end());
        m.labels_.push_back(labels_[r]);
    }
    return m;
}

NaiveBayesModel train_naive_bayes(const FeatureMatrix& matrix, double variance_floor) {
    const std::size_t n = matrix.rows(), d = matrix.cols(), k = matrix.classes().size();
    if (k < 2) throw TrainingError("naive bayes needs at least two classes");
    NaiveBayesModel model;
    model.feature_names = matrix.feature_names();
    model.classes = matrix.classes();
    model.log_prior.assign(k, 0.0);
    model.mean.assign(k * d, 0.0);
    model.variance.assign(k * d, 0.0);

    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t c = matrix.labels()[i];
        ++count[c];
        auto row = matrix.row(i);
        for (std::size_t f = 0; f < d; ++f) model.mean[c * d + f] += row[f];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] < 2)
            throw TrainingError("class " + std::string(to_string(model.classes[c])) +
                                " has fewer than two rows");
        for (std::size_t f = 0; f < d; ++f)
            model.mean[c * d + f] /= static_cast<double>(count[c]);
        model.log_prior[c] =
            std::log(static_cast<double>(count[c]) / static_cast<double>(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t c = matrix.labels()[i];
        auto row = matrix.row(i);
        for (std::size_t f = 0; f < d; ++f) {
            const double delta = row[f] - model.mean[c * d + f];
            model.variance[c * d + f] += delta * delta;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t f = 0; f < d; ++f) {
            double& v = model.variance[c * d + f];
            v /= static_cast<double>(count[c]);
            if (v < variance_floor) v = variance_floor;
        }
    return model;
}

std::uint8_t NaiveBayesModel::predict_row(std::span<const double> row) const {
    const std::size_t k = classes.size(), d = feature_names.size();
    std::uint8_t best = 0;
    double best_score = -kInf;
    for (std::size_t c = 0; c < k; ++c) {
        double score = log_prior[c];
        for (std::size_t f = 0; f < d; ++f) {
            const double v = variance[c * d + f];
            const double delta = row[f] - mean[c * d + f];
            score += -0.5 * std::log(2.0 * std::numbers::pi * v) - delta * delta / (2.0 * v);
        }
        if (score > best_score) {
            best_score = score;
            best = static_cast<std::uint8_t>(c);
        }
    }
    return best;
}

namespace {

// Per-feature row orderings of a training matrix, sorted by (value, row).
// Computed once and reused across every tree trained on that matrix.
struct MasterOrder {
    std::vector<std::vector<std::int32_t>> order;  // features x rows
};

MasterOrder build_master_order(const FeatureMatrix& matrix) {
    const std::size_t n = matrix.rows(), d = matrix.cols();
    MasterOrder master;
    master.order.assign(d, std::vector<std::int32_t>(n));
    std::vector<double> column(n);
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < n; ++i) column[i] = matrix.row(i)[f];
        auto& ord = master.order[f];
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](std::int32_t a, std::int32_t b) {
            if (column[a] != column[b]) return column[a] < column[b];
            return a < b;
        });
    }
    return master;
}

// CART trainer over presorted per-feature sample orderings. Split scoring uses
// an x*ln(x) lookup table so each candidate costs O(1); child partitions are
// stable so the orderings never need resorting. Sample orderings are derived
// from the matrix-wide master order in linear time, even for bootstrap draws.
class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& matrix, std::span<const std::int32_t> draws,
                const MasterOrder& master, std::size_t max_depth, std::size_t min_leaf,
                std::size_t subset_size, std::mt19937_64* engine)
        : d_(matrix.cols()),
          k_(matrix.classes().size()),
          n_(draws.size()),
          max_depth_(max_depth),
          min_leaf_(std::max<std::size_t>(min_leaf, 1)),
          subset_size_(std::min(std::max<std::size_t>(subset_size, 1), d_)),
          engine_(engine) {
        values_.assign(d_, std::vector<double>(n_));
        labels_.resize(n_);
        for (std::size_t p = 0; p < n_; ++p) {
            auto row = matrix.row(static_cast<std::size_t>(draws[p]));
            for (std::size_t f = 0; f < d_; ++f) values_[f][p] = row[f];
            labels_[p] = matrix.labels()[static_cast<std::size_t>(draws[p])];
        }

        // bucket sample positions by source row, ascending position within row
        const std::size_t rows = matrix.rows();
        std::vector<std::int32_t> bucket_start(rows + 1, 0);
        for (std::int32_t r : draws) ++bucket_start[static_cast<std::size_t>(r) + 1];
        for (std::size_t r = 0; r < rows; ++r) bucket_start[r + 1] += bucket_start[r];
        std::vector<std::int32_t> bucketed(n_);
        std::vector<std::int32_t> cursor(bucket_start.begin(), bucket_start.end() - 1);
        for (std::size_t p = 0; p < n_; ++p)
            bucketed[static_cast<std::size_t>(cursor[static_cast<std::size_t>(draws[p])]++)] =
                static_cast<std::int32_t>(p);

        order_.assign(d_, std::vector<std::int32_t>(n_));
        for (std::size_t f = 0; f < d_; ++f) {
            auto& ord = order_[f];
            std::size_t out = 0;
            for (std::int32_t r : master.order[f]) {
                const auto lo = static_cast<std::size_t>(bucket_start[static_cast<std::size_t>(r)]);
                const auto hi =
                    static_cast<std::size_t>(bucket_start[static_cast<std::size_t>(r) + 1]);
                for (std::size_t b = lo; b < hi; ++b) ord[out++] = bucketed[b];
            }
        }

        xlogx_.resize(n_ + 1);
        xlogx_[0] = 0.0;
        for (std::size_t i = 1; i <= n_; ++i) {
            const double x = static_cast<double>(i);
            xlogx_[i] = x * std::log(x);
        }
        go_left_.assign(n_, 0);
        scratch_.resize(n_);
        left_counts_.resize(k_);
        right_counts_.resize(k_);
        all_features_.resize(d_);
        std::iota(all_features_.begin(), all_features_.end(), 0);
        subset_.resize(subset_size_);
    }

    std::vector<DecisionTreeModel::Node> build() {
        nodes_.clear();
        build_node(0, n_, 0);
        return std::move(nodes_);
    }

private:
    struct Best {
        double score = kInf;
        std::size_t feature = 0;
        double threshold = 0.0;
        bool found = false;
    };

    std::span<const std::size_t> pick_subset() {
        if (subset_size_ == d_ || engine_ == nullptr) return all_features_;
        // partial Fisher-Yates over a scratch copy, then ascending order so
        // tie-breaking by feature index stays meaningful
        feature_pool_ = all_features_;
        for (std::size_t i = 0; i < subset_size_; ++i) {
            const std::size_t j = i + rng::uniform_index(*engine_, feature_pool_.size() - i);
            std::swap(feature_pool_[i], feature_pool_[j]);
        }
        std::copy(feature_pool_.begin(), feature_pool_.begin() + subset_size_, subset_.begin());
        std::sort(subset_.begin(), subset_.end());
        return subset_;
    }

    std::int32_t build_node(std::size_t lo, std::size_t hi, std::size_t depth) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        const std::size_t nn = hi - lo;

        std::vector<std::size_t> counts(k_, 0);
        for (std::size_t i = lo; i < hi; ++i) ++counts[labels_[order_[0][i]]];
        std::uint8_t majority = 0;
        std::size_t majority_count = 0;
        bool pure = false;
        for (std::size_t c = 0; c < k_; ++c) {
            if (counts[c] > majority_count) {
                majority_count = counts[c];
                majority = static_cast<std::uint8_t>(c);
            }
            if (counts[c] == nn) pure = true;
        }

        if (pure || nn < 2 * min_leaf_ || depth >= max_depth_) {
            nodes_[id].leaf_class = majority;
            return static_cast<std::int32_t>(id);
        }

        double node_sum = 0.0;  // sum of xlogx over class counts
        for (std::size_t c = 0; c < k_; ++c) node_sum += xlogx_[counts[c]];

        Best best;
        for (const std::size_t f : pick_subset()) {
            const auto& ord = order_[f];
            const auto& vals = values_[f];
            std::fill(left_counts_.begin(), left_counts_.end(), 0);
            std::copy(counts.begin(), counts.end(), right_counts_.begin());
            double sum_left = 0.0, sum_right = node_sum;
            for (std::size_t i = lo; i + 1 < hi; ++i) {
                const std::int32_t pos = ord[i];
                const std::size_t c = labels_[pos];
                sum_left += xlogx_[left_counts_[c] + 1] - xlogx_[left_counts_[c]];
                sum_right += xlogx_[right_counts_[c] - 1] - xlogx_[right_counts_[c]];
                ++left_counts_[c];
                --right_counts_[c];
                const double v = vals[pos];
                const double next = vals[ord[i + 1]];
                if (!(next > v)) continue;
                const std::size_t m_left = i - lo + 1;
                const std::size_t m_right = nn - m_left;
                if (m_left < min_leaf_ || m_right < min_leaf_) continue;
                // weighted child entropy (scaled by nn, in nats)
                const double score =
                    (xlogx_[m_left] - sum_left) + (xlogx_[m_right] - sum_right);
                if (score < best.score) {
                    best.score = score;
                    best.feature = f;
                    best.threshold = v + (next - v) / 2.0;
                    best.found = true;
                }
            }
        }

        if (!best.found) {
            nodes_[id].leaf_class = majority;
            return static_cast<std::int32_t>(id);
        }

        const auto& split_vals = values_[best.feature];
        std::size_t n_left = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            const std::int32_t pos = order_[best.feature][i];
            const bool left = split_vals[pos] < best.threshold;
            go_left_[pos] = left ? 1 : 0;
            if (left) ++n_left;
        }
        const std::size_t mid = lo + n_left;
        for (std::size_t f = 0; f < d_; ++f) {
            auto& ord = order_[f];
            std::size_t out_left = lo, out_right = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                const std::int32_t pos = ord[i];
                if (go_left_[pos])
                    ord[out_left++] = pos;
                else
                    scratch_[out_right++] = pos;
            }
            std::copy(scratch_.begin(), scratch_.begin() + out_right, ord.begin() + mid);
        }

        const std::int32_t left_id = build_node(lo, mid, depth + 1);
        const std::int32_t right_id = build_node(mid, hi, depth + 1);
        DecisionTreeModel::Node& node = nodes_[id];
        node.feature = static_cast<std::int32_t>(best.feature);
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;
        return static_cast<std::int32_t>(id);
    }

    std::size_t d_, k_, n_, max_depth_, min_leaf_, subset_size_;
    std::mt19937_64* engine_;
    std::vector<std::vector<double>> values_;
    std::vector<std::uint8_t> labels_;
    std::vector<std::vector<std::int32_t>> order_;
    std::vector<double> xlogx_;
    std::vector<std::uint8_t> go_left_;
    std::vector<std::int32_t> scratch_;
    std::vector<std::size_t> left_counts_, right_counts_;
    std::vector<std::size_t> all_features_, feature_pool_, subset_;
    std::vector<DecisionTreeModel::Node> nodes_;
};

void check_trainable(const FeatureMatrix& matrix) {
    if (matrix.rows() == 0) throw TrainingError("empty training matrix");
    if (matrix.cols() == 0) throw TrainingError("training matrix has no feature columns");
    if (matrix.classes().empty()) throw TrainingError("training matrix has no classes");
}

}  // namespace

DecisionTreeModel train_decision_tree(const FeatureMatrix& matrix, TreeParams params) {
    check_trainable(matrix);
    DecisionTreeModel model;
    model.feature_names = matrix.feature_names();
    model.classes = matrix.classes();
    const MasterOrder master = build_master_order(matrix);
    std::vector<std::int32_t> draws(matrix.rows());
    std::iota(draws.begin(), draws.end(), 0);
    TreeBuilder builder(matrix, draws, master, params.max_depth, params.min_leaf, matrix.cols(),
                        nullptr);
    model.nodes = builder.build();
    return model;
}

std::uint8_t DecisionTreeModel::predict_row(std::span<const double> row) const {
    const Node* node = &nodes[0];
    while (node->feature >= 0)
        node = &nodes[row[static_cast<std::size_t>(node->feature)] < node->threshold
                          ? static_cast<std::size_t>(node->left)
                          : static_cast<std::size_t>(node->right)];
    return node->leaf_class;
}

std::size_t DecisionTreeModel::depth() const {
    if (nodes.empty()) return 0;
    std::size_t max_depth = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        max_depth = std::max(max_depth, depth);
        const Node& node = nodes[id];
        if (node.feature >= 0) {
            stack.push_back({static_cast<std::size_t>(node.left), depth + 1});
            stack.push_back({static_cast<std::size_t>(node.right), depth + 1});
        }
    }
    return max_depth;
}

RandomForestModel train_random_forest(const FeatureMatrix& matrix, ForestParams params,
                                      std::uint64_t seed) {
    check_trainable(matrix);
    if (params.n_trees == 0) throw TrainingError("forest needs at least one tree");
    RandomForestModel model;
    model.feature_names = matrix.feature_names();
    model.classes = matrix.classes();
    model.trees.reserve(params.n_trees);

    const std::size_t n = matrix.rows();
    std::size_t subset = params.feature_subset;
    if (subset == 0)
        subset = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(matrix.cols()))));
    subset = std::min(std::max<std::size_t>(subset, 1), matrix.cols());

    const MasterOrder master = build_master_order(matrix);
    std::vector<std::int32_t> draws(n);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        std::mt19937_64 engine = rng::make_engine(seed, t);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i)
                draws[i] = static_cast<std::int32_t>(rng::uniform_index(engine, n));
        } else {
            std::iota(draws.begin(), draws.end(), 0);
        }
        TreeBuilder builder(matrix, draws, master, params.max_depth, params.min_leaf, subset,
                            subset == matrix.cols() ? nullptr : &engine);
        DecisionTreeModel tree;
        tree.feature_names = model.feature_names;
        tree.classes = model.classes;
        tree.nodes = builder.build();
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::uint8_t RandomForestModel::predict_row(std::span<const double> row) const {
    std::array<std::size_t, kActivityCount> votes{};
    for (const DecisionTreeModel& tree : trees) ++votes[tree.predict_row(row)];
    std::uint8_t best = 0;
    std::size_t best_votes = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (votes[c] > best_votes) {
            best_votes = votes[c];
            best = static_cast<std::uint8_t>(c);
        }
    }
    return best;
}

std::string_view ModelSpec::name() const {
    switch (kind) {
        case Kind::NaiveBayes: return "naive_bayes";
        case Kind::DecisionTree: return "decision_tree";
        case Kind::RandomForest: return "random_forest";
    }
    return "random_forest";
}

std::optional<ModelSpec::Kind> parse_model_kind(std::string_view name) {
    if (name == "naive_bayes" || name == "nb") return ModelSpec::Kind::NaiveBayes;
    if (name == "decision_tree" || name == "tree") return ModelSpec::Kind::DecisionTree;
    if (name == "random_forest" || name == "forest") return ModelSpec::Kind::RandomForest;
    return std::nullopt;
}

const std::vector<std::string>& Model::feature_names() const {
    return std::visit([](const auto& m) -> const std::vector<std::string>& {
        return m.feature_names;
    }, impl_);
}

const std::vector<ActivityLabel>& Model::classes() const {
    return std::visit([](const auto& m) -> const std::vector<ActivityLabel>& {
        return m.classes;
    }, impl_);
}

ActivityLabel Model::predict_row(std::span<const double> row) const {
    const std::uint8_t c = std::visit([&](const auto& m) { return m.predict_row(row); }, impl_);
    return classes()[c];
}

std::vector<ActivityLabel> Model::predict(const FeatureMatrix& matrix) const {
    if (matrix.feature_names() != feature_names())
        throw FeatureError("matrix columns do not match the trained model");
    std::vector<ActivityLabel> out;
    out.reserve(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) out.push_back(predict_row(matrix.row(i)));
    return out;
}

ActivityLabel Model::predict_vector(const FeatureVector& fv) const {
    std::vector<double> row;
    row.reserve(feature_names().size());
    for (const std::string& name : feature_names()) {
        const auto feat = parse_feature(name);
        const std::optional<double> value = feat ? fv.get(*feat) : std::optional<double>{};
        if (!value) throw FeatureError("feature " + name + " absent from vector");
        row.push_back(*value);
    }
    return predict_row(row);
}

Model train(const FeatureMatrix& matrix, const ModelSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case ModelSpec::Kind::NaiveBayes: return Model(train_naive_bayes(matrix));
        case ModelSpec::Kind::DecisionTree: return Model(train_decision_tree(matrix, spec.tree));
        case ModelSpec::Kind::RandomForest:
            return Model(train_random_forest(matrix, spec.forest, seed));
    }
    throw TrainingError("unknown model kind");
}

std::size_t ConfusionMatrix::total() const {
    std::size_t sum = 0;
    for (const auto& row : counts)
        for (std::size_t v : row) sum += v;
    return sum;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

ConfusionMatrix confusion(std::span<const ActivityLabel> truth,
                          std::span<const ActivityLabel> predicted,
                          std::vector<ActivityLabel> classes) {
    if (truth.size() != predicted.size())
        throw InputError("truth and prediction lengths differ");
    ConfusionMatrix cm;
    cm.classes = std::move(classes);
    cm.counts.assign(cm.classes.size(), std::vector<std::size_t>(cm.classes.size(), 0));
    std::array<std::int8_t, kActivityCount> index_of;
    index_of.fill(-1);
    for (std::size_t k = 0; k < cm.classes.size(); ++k)
        index_of[static_cast<std::size_t>(cm.classes[k])] = static_cast<std::int8_t>(k);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::int8_t t = index_of[static_cast<std::size_t>(truth[i])];
        const std::int8_t p = index_of[static_cast<std::size_t>(predicted[i])];
        if (t < 0 || p < 0)
            throw InputError("label outside the confusion matrix class list");
        ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return cm;
}

std::vector<std::size_t> stratified_folds(const FeatureMatrix& matrix, std::size_t folds,
                                          std::uint64_t seed) {
    if (folds < 2) throw FoldError("need at least two folds");
    std::vector<std::size_t> fold_of_row(matrix.rows(), 0);
    for (std::size_t c = 0; c < matrix.classes().size(); ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < matrix.rows(); ++i)
            if (matrix.labels()[i] == c) members.push_back(i);
        if (members.size() < folds)
            throw FoldError("class " + std::string(to_string(matrix.classes()[c])) + " has " +
                            std::to_string(members.size()) + " rows, fewer than " +
                            std::to_string(folds) + " folds");
        std::mt19937_64 engine = rng::make_engine(seed, 101 + c);
        rng::shuffle(members, engine);
        for (std::size_t i = 0; i < members.size(); ++i) fold_of_row[members[i]] = i % folds;
    }
    return fold_of_row;
}

CVReport cross_validate(const FeatureMatrix& matrix, const ModelSpec& spec, std::size_t folds,
                        std::uint64_t seed) {
    return cross_validate(matrix, spec, stratified_folds(matrix, folds, seed), folds, seed);
}

CVReport cross_validate(const FeatureMatrix& matrix, const ModelSpec& spec,
                        const std::vector<std::size_t>& fold_of_row, std::size_t folds,
                        std::uint64_t seed) {
    if (fold_of_row.size() != matrix.rows())
        throw FoldError("fold assignment length does not match matrix rows");
    if (folds < 2) throw FoldError("need at least two folds");
    for (std::size_t f : fold_of_row)
        if (f >= folds) throw FoldError("fold id out of range");

    CVReport report;
    report.spec = spec;
    report.mask = matrix.mask();
    report.seed = seed;
    report.matrix.classes = matrix.classes();
    report.matrix.counts.assign(matrix.classes().size(),
                                std::vector<std::size_t>(matrix.classes().size(), 0));

    // Training rows are put in a canonical content order so the report depends
    // only on which rows land in each fold, not on the caller's row order
    // (bootstrap draws would otherwise follow the input permutation).
    const auto row_content_less = [&matrix](std::size_t a, std::size_t b) {
        const auto ra = matrix.row(a), rb = matrix.row(b);
        for (std::size_t c = 0; c < ra.size(); ++c) {
            if (ra[c] != rb[c]) return ra[c] < rb[c];
        }
        return matrix.labels()[a] < matrix.labels()[b];
    };

    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < matrix.rows(); ++i)
            (fold_of_row[i] == f ? test_rows : train_rows).push_back(i);
        if (train_rows.empty() || test_rows.empty())
            throw FoldError("fold " + std::to_string(f) + " leaves an empty split");
        std::sort(train_rows.begin(), train_rows.end(), row_content_less);
        const FeatureMatrix train_matrix = matrix.subset(train_rows);
        const Model model = train(train_matrix, spec, rng::derive_seed(seed, 1000 + f));
        std::size_t correct = 0;
        for (std::size_t i : test_rows) {
            const ActivityLabel pred = model.predict_row(matrix.row(i));
            const ActivityLabel truth = matrix.class_of(i);
            if (pred == truth) ++correct;
            std::size_t ti = 0, pi = 0;
            while (matrix.classes()[ti] != truth) ++ti;
            while (matrix.classes()[pi] != pred) ++pi;
            ++report.matrix.counts[ti][pi];
        }
        report.fold_accuracies.push_back(static_cast<double>(correct) /
                                         static_cast<double>(test_rows.size()));
    }
    report.mean_accuracy =
        std::accumulate(report.fold_accuracies.begin(), report.fold_accuracies.end(), 0.0) /
        static_cast<double>(report.fold_accuracies.size());
    return report;
}

}  // namespace envsense
