#include <cmath>
#include <limits>
#include <numbers>

#include "dradapt/error.hpp"
#include "dradapt/optimize.hpp"

namespace dradapt {

double matern52(double distance, double length_scale) {
    const double s = std::sqrt(5.0) * distance / length_scale;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

namespace {

constexpr double kLengthScales[] = {0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0};

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Cholesky of K + noise*I, raising the jitter until it succeeds.
bool factorize(const Eigen::MatrixXd& k, double noise, Eigen::LLT<Eigen::MatrixXd>& chol) {
    for (double jitter = noise; jitter <= 1e-2; jitter *= 10.0) {
        Eigen::MatrixXd a = k;
        a.diagonal().array() += jitter;
        chol.compute(a);
        if (chol.info() == Eigen::Success) return true;
    }
    return false;
}

}  // namespace

GaussianProcess::GaussianProcess(std::vector<std::vector<double>> x, const std::vector<double>& y, double noise)
    : x_(std::move(x)) {
    if (x_.empty() || x_.size() != y.size()) throw ValidationError("GP needs matching, non-empty inputs");
    const auto n = static_cast<Eigen::Index>(x_.size());

    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];
    y_mean_ = yv.mean();
    const double sd = std::sqrt((yv.array() - y_mean_).square().mean());
    y_scale_ = sd > 0.0 ? sd : 1.0;
    const Eigen::VectorXd z = (yv.array() - y_mean_) / y_scale_;

    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            dist(i, j) = euclidean(x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(j)]);

    double best_lml = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (double ell : kLengthScales) {
        Eigen::MatrixXd k = dist.unaryExpr([ell](double d) { return matern52(d, ell); });
        Eigen::LLT<Eigen::MatrixXd> chol;
        if (!factorize(k, noise, chol)) continue;
        const Eigen::VectorXd alpha = chol.solve(z);
        const Eigen::MatrixXd l = chol.matrixL();
        const double lml = -0.5 * z.dot(alpha) - l.diagonal().array().log().sum();
        if (std::isfinite(lml) && lml > best_lml) {
            best_lml = lml;
            length_scale_ = ell;
            chol_ = chol;
            alpha_ = alpha;
            found = true;
        }
    }
    if (!found) throw DegenerateInput("GP kernel matrix is not positive definite");
}

std::pair<double, double> GaussianProcess::predict(const std::vector<double>& x) const {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks(i) = matern52(euclidean(x, x_[static_cast<std::size_t>(i)]), length_scale_);
    const double mean = ks.dot(alpha_);
    const Eigen::VectorXd v = chol_.matrixL().solve(ks);
    const double var = std::max(0.0, 1.0 - v.squaredNorm());
    return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

double expected_improvement(double mean, double sd, double best, double xi) {
    const double improvement = mean - best - xi;
    if (!(sd > 0.0)) return std::max(improvement, 0.0);
    const double z = improvement / sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return improvement * cdf + sd * pdf;
}

}  // namespace dradapt
