#pragma once

#include <cstdint>
#include <utility>
#include <string>
#include <vector>

#include <json.hpp>

namespace dradapt {

// Regressors mapping complexity feature vectors to a predicted maximum
// accuracy. All kinds are deterministic given their seed.

enum class RegressionKind { Linear, Polynomial2, Knn, RandomForest };

RegressionKind parse_regression_kind(const std::string& s);
std::string to_string(RegressionKind k);

struct RegressionOptions {
    std::size_t knn_k = 5;
    std::size_t forest_trees = 100;
    double poly_ridge = 1e-8;
};

class RegressionModel {
public:
    RegressionKind kind() const noexcept { return kind_; }
    std::size_t feature_arity() const noexcept { return arity_; }

    /// Throws ValidationError on arity mismatch.
    double predict(const std::vector<double>& x) const;

    /// Smallest and largest training residual (target - prediction).
    std::pair<double, double> training_residual_range() const noexcept { return residual_range_; }

    nlohmann::json to_json() const;
    static RegressionModel from_json(const nlohmann::json& j);

    // Skips the minimum-sample check; cross-validation folds may be smaller.
    static RegressionModel fit_unchecked(RegressionKind kind, const std::vector<std::vector<double>>& x,
                                         const std::vector<double>& y, std::uint64_t seed,
                                         const RegressionOptions& options);

    struct TreeNode {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

private:
    std::vector<double> standardize(const std::vector<double>& x) const;
    double predict_unchecked(const std::vector<double>& x) const;

    RegressionKind kind_ = RegressionKind::Linear;
    std::size_t arity_ = 0;
    // z-scoring statistics (linear, polynomial2, knn)
    std::vector<double> mean_;
    std::vector<double> scale_;
    // linear / polynomial2
    std::vector<double> coef_;
    double intercept_ = 0.0;
    // knn
    std::size_t k_ = 0;
    std::vector<std::vector<double>> train_z_;
    std::vector<double> train_y_;
    // random forest
    std::vector<std::vector<TreeNode>> trees_;

    std::pair<double, double> residual_range_{0.0, 0.0};
};

/// Requires |x| == |y| >= 5 and a consistent arity.
/// linear: least squares on z-scored features (ridge 1e-8 fallback when
///   rank deficient); polynomial2: degree-2 expansion with interactions and
///   ridge; knn: distance-weighted, exact matches return their mean target;
/// random-forest: bootstrap CART trees grown to purity on variance reduction,
///   every feature considered at each split, thresholds at midpoints.
RegressionModel fit(RegressionKind kind, const std::vector<std::vector<double>>& x,
                    const std::vector<double>& y, std::uint64_t seed,
                    const RegressionOptions& options = {});

/// 1 - SS_res / SS_tot; 0 when the targets have zero variance.
double r2_score(const std::vector<double>& truth, const std::vector<double>& predicted);

struct CvReport {
    RegressionKind kind;
    double mean_r2 = 0.0;
    std::vector<double> fold_r2;
    std::uint64_t seed = 0;
};

/// Shuffled k-fold cross-validation. Requires |x| >= folds.
CvReport cross_validate(RegressionKind kind, const std::vector<std::vector<double>>& x,
                        const std::vector<double>& y, std::size_t folds, std::uint64_t seed,
                        const RegressionOptions& options = {});

/// Fold index of each sample under the shuffle used by cross_validate.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed);

}  // namespace dradapt
