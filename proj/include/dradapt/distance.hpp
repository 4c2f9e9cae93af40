#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dradapt/data.hpp"

namespace dradapt {

/// Symmetric N x N Euclidean distances with zero diagonal.
class DistanceMatrix {
public:
    /// Validates symmetry, zero diagonal, non-negativity and finiteness.
    explicit DistanceMatrix(RowMatrix d);

    std::size_t size() const noexcept { return static_cast<std::size_t>(d_.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const RowMatrix& matrix() const noexcept { return d_; }

    /// Upper-triangle entries (i < j) in row-major order, N(N-1)/2 values.
    std::vector<double> condensed() const;

private:
    struct Trusted {};
    DistanceMatrix(RowMatrix d, Trusted) : d_(std::move(d)) {}
    friend DistanceMatrix pairwise_distances(const RowMatrix& points);

    RowMatrix d_;
};

DistanceMatrix pairwise_distances(const RowMatrix& points);
inline DistanceMatrix pairwise_distances(const Dataset& ds) { return pairwise_distances(ds.points()); }

/// Each row lists the k nearest other points by ascending distance; equal
/// distances are ordered by ascending point index.
class NeighborRanking {
public:
    NeighborRanking(std::size_t k, std::vector<std::int32_t> nn, std::size_t n);

    std::size_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return n_; }
    /// r is zero-based: neighbor(i, 0) is the nearest neighbor of i.
    std::int32_t neighbor(std::size_t i, std::size_t r) const { return nn_[i * k_ + r]; }
    const std::int32_t* row(std::size_t i) const { return nn_.data() + i * k_; }

private:
    std::size_t k_;
    std::size_t n_;
    std::vector<std::int32_t> nn_;
};

/// k must satisfy 1 <= k <= N-1; otherwise ValidationError.
NeighborRanking neighbor_ranking(const DistanceMatrix& dm, std::size_t k);

/// Entry (i, j), i != j, is the 1-based rank of j among the other points by
/// ascending distance from i (index tie-break). Diagonal is 0.
class RankMatrix {
public:
    RankMatrix(std::size_t n, std::vector<std::int32_t> ranks);

    std::size_t size() const noexcept { return n_; }
    std::int32_t operator()(std::size_t i, std::size_t j) const { return ranks_[i * n_ + j]; }
    /// Point holding rank r+1 in row i (inverse permutation of the row).
    std::int32_t by_rank(std::size_t i, std::size_t r) const { return order_[i * (n_ - 1) + r]; }

private:
    std::size_t n_;
    std::vector<std::int32_t> ranks_;
    std::vector<std::int32_t> order_;
};

RankMatrix rank_matrix(const DistanceMatrix& dm);

/// Binary cache layout (little-endian): N as uint64, then N*N float64 row-major.
void write_distance_cache(const DistanceMatrix& dm, const std::filesystem::path& path);
DistanceMatrix read_distance_cache(const std::filesystem::path& path);

/// Loads `<dir>/<content-hash>.dist` if present, otherwise computes and stores it.
DistanceMatrix cached_pairwise_distances(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace dradapt
