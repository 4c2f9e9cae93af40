#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dradapt/distance.hpp"

namespace dradapt {

// Structural complexity metrics. Both scores read only the distance matrix
// and are invariant to a global rescaling of the data. Lower values mean a
// structurally more complex dataset.

enum class ComplexityMetric { Pds, Mnc };

struct ComplexityScore {
    ComplexityMetric metric;
    double value;
    std::optional<std::size_t> k;  // MNC only
};

/// Ordered complexity features: PDS first, then MNC(k) for each requested k.
struct FeatureVector {
    std::vector<ComplexityScore> entries;

    std::size_t size() const noexcept { return entries.size(); }
    std::vector<double> values() const;
    /// Tags such as "PDS", "MNC(25)" in canonical order.
    std::vector<std::string> tags() const;
};

inline const std::vector<std::size_t> kDefaultMncKs = {25, 50, 75};

/// Pairwise distance shift: natural log of (population std / mean) over the
/// N(N-1)/2 unordered pair distances. Throws DegenerateInput when the
/// distances have no spread.
double pds(const DistanceMatrix& dm);

/// Sparse non-negative row of a similarity matrix, entries sorted by index.
/// The owner's own entry is never stored (self-similarity is 0).
struct SimilarityRow {
    std::size_t owner = 0;
    std::vector<std::pair<std::int32_t, double>> entries;

    double at(std::size_t j) const;
    double squared_norm() const;
};

/// Row i holds k - r + 1 at its r-th nearest neighbor (r = 1..k), 0 elsewhere.
std::vector<SimilarityRow> knn_similarity_matrix(const NeighborRanking& nr);

/// Entry (i, j) sums (k + 1 - m)(k + 1 - n) over every point that is the
/// m-th neighbor of i and the n-th neighbor of j. Symmetric, zero diagonal.
std::vector<SimilarityRow> snn_similarity_matrix(const NeighborRanking& nr);

/// Cosine similarity of two sparse rows; 0 when either row is all zeros.
double row_cosine(const SimilarityRow& a, const SimilarityRow& b);

/// Mutual neighbor consistency: mean over points of the cosine between their
/// kNN and SNN similarity rows. In [0, 1].
double mnc(const NeighborRanking& nr);
double mnc(const DistanceMatrix& dm, std::size_t k);
double mnc(const Dataset& ds, std::size_t k);

/// PDS followed by MNC(k) for each k, sharing one distance matrix.
/// Throws ValidationError when max(ks) >= N.
FeatureVector complexity_features(const DistanceMatrix& dm,
                                  const std::vector<std::size_t>& ks = kDefaultMncKs);
FeatureVector complexity_features(const Dataset& ds,
                                  const std::vector<std::size_t>& ks = kDefaultMncKs);

}  // namespace dradapt
