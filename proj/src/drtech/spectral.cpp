#include <cmath>

#include <Eigen/Eigenvalues>

#include "dradapt/drtech.hpp"
#include "dradapt/error.hpp"

namespace dradapt {
namespace {

// Flips each column so that its largest-magnitude entry is positive.
void normalize_signs(RowMatrix& y) {
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
        Eigen::Index arg = 0;
        y.col(c).cwiseAbs().maxCoeff(&arg);
        if (y(arg, c) < 0.0) y.col(c) *= -1.0;
    }
}

// Top-2 eigenpairs (descending) of a symmetric matrix; eigenvalues below 0 clamp to 0.
void top_two(const Eigen::MatrixXd& sym, const char* technique, Eigen::MatrixXd& vectors,
             Eigen::Vector2d& values) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw ProjectionError(technique, 0, "eigendecomposition failed");
    const Eigen::Index n = sym.rows();
    vectors = Eigen::MatrixXd::Zero(n, 2);
    values = Eigen::Vector2d::Zero();
    for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, n); ++c) {
        vectors.col(c) = solver.eigenvectors().col(n - 1 - c);
        values(c) = std::max(0.0, solver.eigenvalues()(n - 1 - c));
    }
}

}  // namespace

RowMatrix pca_project(const RowMatrix& x) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;

    Eigen::MatrixXd vectors;
    Eigen::Vector2d values;
    RowMatrix y(n, 2);
    if (d <= n) {
        const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
        top_two(cov, technique_id::kPca, vectors, values);
        y = centered * vectors;
    } else {
        // Gram route: left singular vectors scaled by singular values.
        const Eigen::MatrixXd gram = centered * centered.transpose();
        top_two(gram, technique_id::kPca, vectors, values);
        for (Eigen::Index c = 0; c < 2; ++c) y.col(c) = vectors.col(c) * std::sqrt(values(c));
    }
    normalize_signs(y);
    return y;
}

RowMatrix classical_mds(const RowMatrix& dist, double power, const char* technique) {
    const Eigen::Index n = dist.rows();
    Eigen::MatrixXd sq(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = power == 1.0 ? dist(i, j) : std::pow(dist(i, j), power);
            sq(i, j) = v * v;
        }
    // B = -1/2 J D^2 J with J the centering matrix.
    const Eigen::VectorXd row_mean = sq.rowwise().mean();
    const Eigen::RowVectorXd col_mean = sq.colwise().mean();
    const double grand = sq.mean();
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);

    Eigen::MatrixXd vectors;
    Eigen::Vector2d values;
    top_two(b, technique, vectors, values);
    RowMatrix y(n, 2);
    for (Eigen::Index c = 0; c < 2; ++c) y.col(c) = vectors.col(c) * std::sqrt(values(c));
    if (!y.allFinite()) throw ProjectionError(technique, 0, "non-finite embedding");
    normalize_signs(y);
    return y;
}

}  // namespace dradapt
