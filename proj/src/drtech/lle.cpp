#include <Eigen/Eigenvalues>

#include "dradapt/drtech.hpp"
#include "dradapt/error.hpp"

namespace dradapt {

RowMatrix lle_project(const Dataset& ds, std::size_t n_neighbors, double regularization) {
    const std::size_t n = ds.size();
    if (n_neighbors < 1 || n_neighbors >= n) throw ValidationError("lle: n_neighbors must lie in [1, N-1]");
    if (!(regularization > 0.0)) throw ValidationError("lle: regularization must be positive");

    const RowMatrix& x = ds.points();
    const NeighborRanking nr = neighbor_ranking(pairwise_distances(ds), n_neighbors);
    const auto k = static_cast<Eigen::Index>(n_neighbors);

    // Reconstruction weights; each row of w sums to 1.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd z(k, x.cols());
        for (Eigen::Index r = 0; r < k; ++r)
            z.row(r) = x.row(nr.neighbor(i, static_cast<std::size_t>(r))) - x.row(static_cast<Eigen::Index>(i));
        Eigen::MatrixXd gram = z * z.transpose();
        const double trace = gram.trace();
        gram.diagonal().array() += trace > 0.0 ? regularization * trace : regularization;
        Eigen::VectorXd weights = gram.ldlt().solve(Eigen::VectorXd::Ones(k));
        const double total = weights.sum();
        if (!std::isfinite(total) || total == 0.0) {
            throw ProjectionError(technique_id::kLle, static_cast<int>(i), "singular local Gram matrix");
        }
        weights /= total;
        for (Eigen::Index r = 0; r < k; ++r)
            w(static_cast<Eigen::Index>(i), nr.neighbor(i, static_cast<std::size_t>(r))) = weights(r);
    }

    const Eigen::MatrixXd i_minus_w = Eigen::MatrixXd::Identity(w.rows(), w.cols()) - w;
    const Eigen::MatrixXd m = i_minus_w.transpose() * i_minus_w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw ProjectionError(technique_id::kLle, 0, "eigendecomposition failed");

    // Skip the bottom (constant) eigenvector.
    RowMatrix y(static_cast<Eigen::Index>(n), 2);
    y.col(0) = solver.eigenvectors().col(1);
    y.col(1) = solver.eigenvectors().col(2);
    for (Eigen::Index c = 0; c < 2; ++c) {
        Eigen::Index arg = 0;
        y.col(c).cwiseAbs().maxCoeff(&arg);
        if (y(arg, c) < 0.0) y.col(c) *= -1.0;
    }
    if (!y.allFinite()) throw ProjectionError(technique_id::kLle, 0, "non-finite embedding");
    return y;
}

}  // namespace dradapt
