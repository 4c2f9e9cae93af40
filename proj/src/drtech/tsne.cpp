#include <cmath>
#include <limits>

#include "dradapt/drtech.hpp"
#include "dradapt/error.hpp"
#include "dradapt/parallel.hpp"

namespace dradapt {

RowMatrix tsne_joint_probabilities(const DistanceMatrix& dm, double perplexity) {
    const std::size_t n = dm.size();
    if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n)) {
        throw ValidationError("tsne-exact: perplexity must lie in (0, N)");
    }
    const double target = std::log(perplexity);
    RowMatrix cond = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

    parallel_for(n, [&](std::size_t i) {
        // Squared distances shifted by the row minimum; the shift cancels on normalization.
        std::vector<double> d2(n, 0.0);
        double dmin = std::numeric_limits<double>::infinity();
        double dmean = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            d2[j] = dm(i, j) * dm(i, j);
            dmin = std::min(dmin, d2[j]);
            dmean += d2[j];
        }
        dmean /= static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d2[j] -= dmin;

        // Starting from 1/mean keeps the search independent of the data scale.
        double beta = dmean > 0.0 ? 1.0 / dmean : 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        std::vector<double> p(n, 0.0);
        for (int iter = 0; iter < 200; ++iter) {
            double sum = 0.0;
            double weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                p[j] = std::exp(-beta * d2[j]);
                sum += p[j];
                weighted += d2[j] * p[j];
            }
            const double entropy = std::log(sum) + beta * weighted / sum;
            for (std::size_t j = 0; j < n; ++j) p[j] /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        for (std::size_t j = 0; j < n; ++j) cond(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j];
    });

    RowMatrix joint = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
    for (Eigen::Index i = 0; i < joint.rows(); ++i) {
        for (Eigen::Index j = 0; j < joint.cols(); ++j) {
            joint(i, j) = i == j ? 0.0 : std::max(joint(i, j), 1e-12);
        }
    }
    return joint;
}

namespace {

// Student-t kernel w_ij = 1 / (1 + |y_i - y_j|^2), zero diagonal, and its sum.
RowMatrix student_kernel(const RowMatrix& y, double& total) {
    const Eigen::Index n = y.rows();
    RowMatrix w = RowMatrix::Zero(n, n);
    total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
            w(i, j) = v;
            w(j, i) = v;
            total += 2.0 * v;
        }
    }
    return w;
}

// 4 * sum_j (p_ij - mass * q_ij) w_ij (y_i - y_j). With mass = sum(P) this is
// the exact KL gradient; the optimizer passes mass = 1 under exaggeration.
RowMatrix kl_gradient(const RowMatrix& p, const RowMatrix& y, double mass) {
    double total = 0.0;
    const RowMatrix w = student_kernel(y, total);
    const Eigen::Index n = y.rows();
    RowMatrix grad = RowMatrix::Zero(n, y.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double coeff = (p(i, j) - mass * w(i, j) / total) * w(i, j);
            grad.row(i) += coeff * (y.row(i) - y.row(j));
        }
    }
    return 4.0 * grad;
}

}  // namespace

double tsne_kl_divergence(const RowMatrix& p, const RowMatrix& y) {
    double total = 0.0;
    const RowMatrix w = student_kernel(y, total);
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j || p(i, j) <= 0.0) continue;
            kl += p(i, j) * std::log(p(i, j) / (w(i, j) / total));
        }
    }
    return kl;
}

RowMatrix tsne_gradient(const RowMatrix& p, const RowMatrix& y) {
    return kl_gradient(p, y, p.sum());
}

RowMatrix tsne_project(const Dataset& ds, const TsneOptions& options, std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (options.n_iter < 1) throw ValidationError("tsne-exact: n_iter must be positive");
    if (!(options.learning_rate > 0.0)) throw ValidationError("tsne-exact: learning_rate must be positive");

    const RowMatrix p = tsne_joint_probabilities(pairwise_distances(ds), options.perplexity);

    Rng rng(seed);
    const auto rows = static_cast<Eigen::Index>(n);
    RowMatrix y(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < 2; ++c) y(i, c) = 1e-4 * rng.normal();

    RowMatrix update = RowMatrix::Zero(rows, 2);
    RowMatrix gains = RowMatrix::Ones(rows, 2);
    for (int iter = 0; iter < options.n_iter; ++iter) {
        const bool early = iter < options.exaggeration_iters;
        const double momentum = early ? 0.5 : 0.8;
        const RowMatrix grad = early ? kl_gradient(options.exaggeration * p, y, 1.0) : kl_gradient(p, y, 1.0);
        if (!grad.allFinite()) throw ProjectionError(technique_id::kTsne, iter, "non-finite gradient");

        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
                gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
                update(i, c) = momentum * update(i, c) - options.learning_rate * gains(i, c) * grad(i, c);
            }
        }
        y += update;
        y.rowwise() -= y.colwise().mean();
        if (!y.allFinite()) throw ProjectionError(technique_id::kTsne, iter, "non-finite embedding");
    }
    return y;
}

}  // namespace dradapt
