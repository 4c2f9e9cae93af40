#include "dradapt/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "dradapt/error.hpp"
#include "dradapt/rng.hpp"

namespace dradapt {

RegressionKind parse_regression_kind(const std::string& s) {
    if (s == "linear") return RegressionKind::Linear;
    if (s == "polynomial2" || s == "polynomial") return RegressionKind::Polynomial2;
    if (s == "knn") return RegressionKind::Knn;
    if (s == "random-forest" || s == "rf") return RegressionKind::RandomForest;
    throw LookupError("unknown regression kind '" + s + "'");
}

std::string to_string(RegressionKind k) {
    switch (k) {
        case RegressionKind::Linear: return "linear";
        case RegressionKind::Polynomial2: return "polynomial2";
        case RegressionKind::Knn: return "knn";
        case RegressionKind::RandomForest: return "random-forest";
    }
    return "?";
}

namespace {

using Rows = std::vector<std::vector<double>>;

std::vector<double> poly_expand(const std::vector<double>& z) {
    std::vector<double> out(z);
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i; j < z.size(); ++j) out.push_back(z[i] * z[j]);
    return out;
}

// Least squares with an unpenalized intercept in column 0. ridge < 0 means
// "plain least squares, ridge 1e-8 only if rank deficient".
Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double ridge) {
    if (ridge < 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() == a.cols()) return qr.solve(y);
        ridge = 1e-8;
    }
    Eigen::MatrixXd normal = a.transpose() * a;
    for (Eigen::Index i = 1; i < normal.rows(); ++i) normal(i, i) += ridge * static_cast<double>(a.rows());
    return normal.ldlt().solve(a.transpose() * y);
}

// ---------------------------------------------------------------------------
// CART regression tree

class TreeBuilder {
public:
    TreeBuilder(const Rows& x, const std::vector<double>& y) : x_(x), y_(y) {}

    std::vector<RegressionModel::TreeNode> build(std::vector<std::size_t> samples) {
        nodes_.clear();
        grow(samples);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::size_t>& samples) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        double sum = 0.0;
        for (auto s : samples) sum += y_[s];
        nodes_[static_cast<std::size_t>(id)].value = sum / static_cast<double>(samples.size());

        if (samples.size() < 2) return id;

        const std::size_t arity = x_[samples.front()].size();
        double best_cost = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        // Parent SSE; a split must improve on it.
        double parent_sq = 0.0;
        for (auto s : samples) parent_sq += y_[s] * y_[s];
        const double parent_cost = parent_sq - sum * sum / static_cast<double>(samples.size());
        if (parent_cost <= 1e-14 * std::max(1.0, parent_sq)) return id;

        std::vector<std::size_t> order(samples);
        for (std::size_t f = 0; f < arity; ++f) {
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
            double left_sum = 0.0, left_sq = 0.0;
            const double n = static_cast<double>(order.size());
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const double v = y_[order[i]];
                left_sum += v;
                left_sq += v * v;
                const double lo = x_[order[i]][f];
                const double hi = x_[order[i + 1]][f];
                if (!(lo < hi)) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = n - nl;
                const double right_sum = sum - left_sum;
                const double right_sq = parent_sq - left_sq;
                const double cost = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (lo + hi);
                }
            }
        }
        if (best_feature < 0 || !(best_cost < parent_cost)) return id;

        std::vector<std::size_t> left, right;
        for (auto s : samples) {
            (x_[s][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();
        const int l = grow(left);
        const int r = grow(right);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const Rows& x_;
    const std::vector<double>& y_;
    std::vector<RegressionModel::TreeNode> nodes_;
};

double tree_predict(const std::vector<RegressionModel::TreeNode>& nodes, const std::vector<double>& x) {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                         ? nodes[i].left
                                         : nodes[i].right);
    }
    return nodes[i].value;
}

void check_training_set(const Rows& x, const std::vector<double>& y, std::size_t min_samples) {
    if (x.size() != y.size()) throw ValidationError("feature rows and targets differ in count");
    if (x.size() < min_samples) {
        throw ValidationError("regression needs at least " + std::to_string(min_samples) + " samples, got " +
                              std::to_string(x.size()));
    }
    const std::size_t arity = x.front().size();
    if (arity == 0) throw ValidationError("feature vectors must not be empty");
    for (const auto& row : x) {
        if (row.size() != arity) throw ValidationError("inconsistent feature arity");
        for (double v : row)
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
    }
    for (double v : y)
        if (!std::isfinite(v)) throw ValidationError("non-finite regression target");
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> RegressionModel::standardize(const std::vector<double>& x) const {
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean_[j]) / scale_[j];
    return z;
}

double RegressionModel::predict(const std::vector<double>& x) const {
    if (x.size() != arity_) {
        throw ValidationError("feature vector has arity " + std::to_string(x.size()) + ", model expects " +
                              std::to_string(arity_));
    }
    return predict_unchecked(x);
}

double RegressionModel::predict_unchecked(const std::vector<double>& x) const {
    switch (kind_) {
        case RegressionKind::Linear:
        case RegressionKind::Polynomial2: {
            const auto z = standardize(x);
            const auto f = kind_ == RegressionKind::Linear ? z : poly_expand(z);
            double out = intercept_;
            for (std::size_t j = 0; j < f.size(); ++j) out += coef_[j] * f[j];
            return out;
        }
        case RegressionKind::Knn: {
            const auto z = standardize(x);
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(train_z_.size());
            for (std::size_t i = 0; i < train_z_.size(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < z.size(); ++j) s += (z[j] - train_z_[i][j]) * (z[j] - train_z_[i][j]);
                dist.emplace_back(std::sqrt(s), i);
            }
            const std::size_t k = std::min(k_, dist.size());
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
            double exact_sum = 0.0;
            std::size_t exact = 0;
            for (const auto& [d, i] : dist) {
                if (d != 0.0) break;
                exact_sum += train_y_[i];
                ++exact;
            }
            if (exact > 0) return exact_sum / static_cast<double>(exact);
            double wsum = 0.0, ysum = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                const double w = 1.0 / dist[r].first;
                wsum += w;
                ysum += w * train_y_[dist[r].second];
            }
            return ysum / wsum;
        }
        case RegressionKind::RandomForest: {
            double total = 0.0;
            for (const auto& tree : trees_) total += tree_predict(tree, x);
            return total / static_cast<double>(trees_.size());
        }
    }
    return 0.0;
}

RegressionModel fit(RegressionKind kind, const Rows& x, const std::vector<double>& y, std::uint64_t seed,
                    const RegressionOptions& options) {
    if (x.empty()) throw ValidationError("regression needs at least 5 samples, got 0");
    check_training_set(x, y, 5);
    return RegressionModel::fit_unchecked(kind, x, y, seed, options);
}

RegressionModel RegressionModel::fit_unchecked(RegressionKind kind, const Rows& x, const std::vector<double>& y,
                                               std::uint64_t seed, const RegressionOptions& options) {

    RegressionModel m;
    m.kind_ = kind;
    m.arity_ = x.front().size();
    const std::size_t n = x.size();

    const bool scaled = kind != RegressionKind::RandomForest;
    if (scaled) {
        m.mean_.assign(m.arity_, 0.0);
        m.scale_.assign(m.arity_, 1.0);
        for (std::size_t j = 0; j < m.arity_; ++j) {
            double mu = 0.0;
            for (const auto& row : x) mu += row[j];
            mu /= static_cast<double>(n);
            double ss = 0.0;
            for (const auto& row : x) ss += (row[j] - mu) * (row[j] - mu);
            const double sd = std::sqrt(ss / static_cast<double>(n));
            m.mean_[j] = mu;
            m.scale_[j] = sd > 0.0 ? sd : 1.0;
        }
    }

    switch (kind) {
        case RegressionKind::Linear:
        case RegressionKind::Polynomial2: {
            const bool poly = kind == RegressionKind::Polynomial2;
            std::vector<std::vector<double>> rows;
            for (const auto& row : x) {
                auto z = m.standardize(row);
                rows.push_back(poly ? poly_expand(z) : z);
            }
            const auto p = static_cast<Eigen::Index>(rows.front().size());
            Eigen::MatrixXd a(static_cast<Eigen::Index>(n), p + 1);
            Eigen::VectorXd target(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                a(static_cast<Eigen::Index>(i), 0) = 1.0;
                for (Eigen::Index j = 0; j < p; ++j) a(static_cast<Eigen::Index>(i), j + 1) = rows[i][static_cast<std::size_t>(j)];
                target(static_cast<Eigen::Index>(i)) = y[i];
            }
            const Eigen::VectorXd beta = solve_least_squares(a, target, poly ? options.poly_ridge : -1.0);
            if (!beta.allFinite()) throw ValidationError("least-squares solve produced non-finite coefficients");
            m.intercept_ = beta(0);
            m.coef_.assign(beta.data() + 1, beta.data() + beta.size());
            break;
        }
        case RegressionKind::Knn: {
            if (options.knn_k < 1) throw ValidationError("knn regression needs k >= 1");
            m.k_ = options.knn_k;
            for (const auto& row : x) m.train_z_.push_back(m.standardize(row));
            m.train_y_ = y;
            break;
        }
        case RegressionKind::RandomForest: {
            if (options.forest_trees < 1) throw ValidationError("random forest needs at least one tree");
            TreeBuilder builder(x, y);
            for (std::size_t t = 0; t < options.forest_trees; ++t) {
                Rng rng(derive_seed(seed, t));
                std::vector<std::size_t> boot(n);
                for (auto& s : boot) s = rng.below(n);
                m.trees_.push_back(builder.build(std::move(boot)));
            }
            break;
        }
    }

    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - m.predict_unchecked(x[i]);
        lo = i == 0 ? r : std::min(lo, r);
        hi = i == 0 ? r : std::max(hi, r);
    }
    m.residual_range_ = {lo, hi};
    return m;
}

// ---------------------------------------------------------------------------

nlohmann::json RegressionModel::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    j["arity"] = arity_;
    j["residual_range"] = {residual_range_.first, residual_range_.second};
    if (kind_ != RegressionKind::RandomForest) {
        j["mean"] = mean_;
        j["scale"] = scale_;
    }
    switch (kind_) {
        case RegressionKind::Linear:
        case RegressionKind::Polynomial2:
            j["coef"] = coef_;
            j["intercept"] = intercept_;
            break;
        case RegressionKind::Knn:
            j["k"] = k_;
            j["train_z"] = train_z_;
            j["train_y"] = train_y_;
            break;
        case RegressionKind::RandomForest: {
            auto trees = nlohmann::json::array();
            for (const auto& tree : trees_) {
                auto nodes = nlohmann::json::array();
                for (const auto& nd : tree) nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
                trees.push_back(std::move(nodes));
            }
            j["trees"] = std::move(trees);
            break;
        }
    }
    return j;
}

RegressionModel RegressionModel::from_json(const nlohmann::json& j) {
    RegressionModel m;
    try {
        m.kind_ = parse_regression_kind(j.at("kind").get<std::string>());
        m.arity_ = j.at("arity").get<std::size_t>();
        const auto rr = j.at("residual_range");
        m.residual_range_ = {rr.at(0).get<double>(), rr.at(1).get<double>()};
        if (m.kind_ != RegressionKind::RandomForest) {
            m.mean_ = j.at("mean").get<std::vector<double>>();
            m.scale_ = j.at("scale").get<std::vector<double>>();
            if (m.mean_.size() != m.arity_ || m.scale_.size() != m.arity_)
                throw ParseError("regression model statistics do not match arity");
        }
        switch (m.kind_) {
            case RegressionKind::Linear:
            case RegressionKind::Polynomial2:
                m.coef_ = j.at("coef").get<std::vector<double>>();
                m.intercept_ = j.at("intercept").get<double>();
                break;
            case RegressionKind::Knn:
                m.k_ = j.at("k").get<std::size_t>();
                m.train_z_ = j.at("train_z").get<std::vector<std::vector<double>>>();
                m.train_y_ = j.at("train_y").get<std::vector<double>>();
                break;
            case RegressionKind::RandomForest:
                for (const auto& tree : j.at("trees")) {
                    std::vector<TreeNode> nodes;
                    for (const auto& nd : tree) {
                        nodes.push_back({nd.at(0).get<int>(), nd.at(1).get<double>(), nd.at(2).get<int>(),
                                         nd.at(3).get<int>(), nd.at(4).get<double>()});
                    }
                    m.trees_.push_back(std::move(nodes));
                }
                break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("regression model: ") + e.what());
    }
    return m;
}

double r2_score(const std::vector<double>& truth, const std::vector<double>& predicted) {
    if (truth.size() != predicted.size() || truth.empty()) throw ValidationError("r2 inputs differ in length");
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
        ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    }
    const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
    if (*lo == *hi || ss_tot == 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
    Rng rng(seed);
    const auto perm = rng.permutation(n);
    std::vector<std::size_t> fold(n);
    for (std::size_t r = 0; r < n; ++r) fold[perm[r]] = r % folds;
    return fold;
}

CvReport cross_validate(RegressionKind kind, const Rows& x, const std::vector<double>& y, std::size_t folds,
                        std::uint64_t seed, const RegressionOptions& options) {
    if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
    if (x.size() < folds) {
        throw ValidationError("cross-validation needs at least " + std::to_string(folds) + " samples, got " +
                              std::to_string(x.size()));
    }
    if (x.size() != y.size()) throw ValidationError("feature rows and targets differ in count");

    const auto fold = fold_assignment(x.size(), folds, seed);
    CvReport report{kind, 0.0, {}, seed};
    for (std::size_t f = 0; f < folds; ++f) {
        Rows train_x, test_x;
        std::vector<double> train_y, test_y;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (fold[i] == f) {
                test_x.push_back(x[i]);
                test_y.push_back(y[i]);
            } else {
                train_x.push_back(x[i]);
                train_y.push_back(y[i]);
            }
        }
        check_training_set(train_x, train_y, 1);
        const auto model = RegressionModel::fit_unchecked(kind, train_x, train_y, derive_seed(seed, f), options);
        std::vector<double> pred;
        for (const auto& row : test_x) pred.push_back(model.predict(row));
        report.fold_r2.push_back(r2_score(test_y, pred));
    }
    report.mean_r2 = std::accumulate(report.fold_r2.begin(), report.fold_r2.end(), 0.0) /
                     static_cast<double>(report.fold_r2.size());
    return report;
}

}  // namespace dradapt
