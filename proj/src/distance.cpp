#include "dradapt/distance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include "dradapt/error.hpp"
#include "dradapt/parallel.hpp"

namespace dradapt {

DistanceMatrix::DistanceMatrix(RowMatrix d) : d_(std::move(d)) {
    if (d_.rows() != d_.cols()) throw ValidationError("distance matrix must be square");
    if (!d_.allFinite()) throw ValidationError("distance matrix has non-finite entries");
    for (Eigen::Index i = 0; i < d_.rows(); ++i) {
        if (d_(i, i) != 0.0) throw ValidationError("distance matrix diagonal must be zero");
        for (Eigen::Index j = i + 1; j < d_.cols(); ++j) {
            if (d_(i, j) != d_(j, i)) throw ValidationError("distance matrix must be symmetric");
            if (d_(i, j) < 0.0) throw ValidationError("distance matrix has negative entries");
        }
    }
}

std::vector<double> DistanceMatrix::condensed() const {
    const std::size_t n = size();
    std::vector<double> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out.push_back((*this)(i, j));
    return out;
}

DistanceMatrix pairwise_distances(const RowMatrix& points) {
    const Eigen::Index n = points.rows();
    RowMatrix d = RowMatrix::Zero(n, n);
    // Row i owns every pair (i, j) with j > i, so writes never overlap.
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
        const auto i = static_cast<Eigen::Index>(row);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (points.row(i) - points.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    });
    return DistanceMatrix(std::move(d), DistanceMatrix::Trusted{});
}

// ---------------------------------------------------------------------------

NeighborRanking::NeighborRanking(std::size_t k, std::vector<std::int32_t> nn, std::size_t n)
    : k_(k), n_(n), nn_(std::move(nn)) {
    if (nn_.size() != k_ * n_) throw ValidationError("neighbor table has wrong size");
}

NeighborRanking neighbor_ranking(const DistanceMatrix& dm, std::size_t k) {
    const std::size_t n = dm.size();
    if (k < 1 || k >= n) {
        throw ValidationError("neighborhood size k=" + std::to_string(k) + " must lie in [1, " +
                              std::to_string(n - 1) + "]");
    }
    std::vector<std::int32_t> nn(n * k);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::int32_t>> row;
        row.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row.emplace_back(dm(i, j), static_cast<std::int32_t>(j));
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
        for (std::size_t r = 0; r < k; ++r) nn[i * k + r] = row[r].second;
    });
    return NeighborRanking(k, std::move(nn), n);
}

RankMatrix::RankMatrix(std::size_t n, std::vector<std::int32_t> ranks)
    : n_(n), ranks_(std::move(ranks)), order_(n * (n - 1)) {
    if (ranks_.size() != n * n) throw ValidationError("rank matrix has wrong size");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto r = ranks_[i * n + j];
            if (r < 1 || static_cast<std::size_t>(r) > n - 1) throw ValidationError("rank out of range");
            order_[i * (n - 1) + static_cast<std::size_t>(r - 1)] = static_cast<std::int32_t>(j);
        }
    }
}

RankMatrix rank_matrix(const DistanceMatrix& dm) {
    const std::size_t n = dm.size();
    std::vector<std::int32_t> ranks(n * n, 0);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::int32_t>> row;
        row.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row.emplace_back(dm(i, j), static_cast<std::int32_t>(j));
        std::sort(row.begin(), row.end());
        for (std::size_t r = 0; r < row.size(); ++r)
            ranks[i * n + static_cast<std::size_t>(row[r].second)] = static_cast<std::int32_t>(r + 1);
    });
    return RankMatrix(n, std::move(ranks));
}

// ---------------------------------------------------------------------------
// Binary cache

namespace {

template <typename T>
T to_little_endian(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

}  // namespace

void write_distance_cache(const DistanceMatrix& dm, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write distance cache " + path.string());
    const std::uint64_t n = to_little_endian<std::uint64_t>(dm.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (std::size_t i = 0; i < dm.size(); ++i) {
        for (std::size_t j = 0; j < dm.size(); ++j) {
            const double v = to_little_endian(dm(i, j));
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
}

DistanceMatrix read_distance_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open distance cache " + path.string());
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    n = to_little_endian(n);
    if (!in || n == 0 || n > (1ULL << 20)) throw ParseError("corrupt distance cache header");
    RowMatrix d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            d(i, j) = to_little_endian(v);
        }
    }
    if (!in) throw ParseError("truncated distance cache " + path.string());
    return DistanceMatrix(std::move(d));
}

DistanceMatrix cached_pairwise_distances(const Dataset& ds, const std::filesystem::path& dir) {
    std::ostringstream name;
    name << std::hex << ds.content_hash() << ".dist";
    const auto path = dir / name.str();
    if (std::filesystem::exists(path)) {
        auto dm = read_distance_cache(path);
        if (dm.size() == ds.size()) return dm;
    }
    auto dm = pairwise_distances(ds);
    std::filesystem::create_directories(dir);
    write_distance_cache(dm, path);
    return dm;
}

}  // namespace dradapt
