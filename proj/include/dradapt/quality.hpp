#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dradapt/distance.hpp"

namespace dradapt {

// Projection quality metrics C(X, Y). Every score is oriented so that higher
// means a more faithful projection, and every score is unchanged by a global
// rescaling of X or Y.

/// Venna & Kaski trustworthiness. Penalizes points that enter the low-dim
/// k-neighborhood without being high-dim neighbors, by their high-dim rank
/// excess over k. Requires 1 <= k < N/2.
double trustworthiness(const RankMatrix& rank_hi, const RankMatrix& rank_lo, std::size_t k);

/// Mirror of trustworthiness: high-dim neighbors missing from the low-dim
/// neighborhood, penalized by their low-dim rank excess.
/// continuity(hi, lo, k) == trustworthiness(lo, hi, k).
double continuity(const RankMatrix& rank_hi, const RankMatrix& rank_lo, std::size_t k);

/// Harmonic mean of a score pair; 0 when both are 0.
double f1_score(double a, double b);
inline double tnc_f1(double t, double c) { return f1_score(t, c); }
inline double mrre_f1(double m_missing, double m_false) { return f1_score(m_missing, m_false); }

struct MrrePair {
    double missing;  // relative rank error over high-dim neighborhoods, as quality
    double false_;   // relative rank error over low-dim neighborhoods, as quality
};

/// Lee & Verleysen mean relative rank errors, each mapped to [0, 1] as
/// 1 - error / (N * sum_{r=1..k} |N - 2r + 1| / r). Requires 1 <= k < N-1.
MrrePair mrre(const RankMatrix& rank_hi, const RankMatrix& rank_lo, std::size_t k);

/// Correlations over the N(N-1)/2 unordered pair distances. Spearman uses
/// average ranks for ties. Zero variance on either side is DegenerateInput.
double spearman_rho(const DistanceMatrix& dm_hi, const DistanceMatrix& dm_lo);
double pearson_r(const DistanceMatrix& dm_hi, const DistanceMatrix& dm_lo);

/// Average (fractional) ranks, 1-based, ties share their mean rank.
std::vector<double> average_ranks(const std::vector<double>& values);
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Metric registry used by the optimizer and workflow.

enum class QualityMetric { Tnc, Mrre, Spearman, Pearson };

/// Accepts "tnc", "tnc-f1", "mrre", "mrre-f1", "spearman", "pearson".
QualityMetric parse_quality_metric(const std::string& id);
std::string to_string(QualityMetric m);
bool is_local(QualityMetric m);
/// Declared value range of the metric: [0,1] for local, [-1,1] for global.
std::pair<double, double> metric_range(QualityMetric m);

inline constexpr std::size_t kDefaultQualityK = 10;

struct QualityScore {
    QualityMetric metric;
    double value;
    std::optional<std::size_t> k;
    /// The two underlying scores for F1-style metrics.
    std::optional<std::pair<double, double>> components;
};

/// Precomputed high-dimensional side, reused across many projections.
class QualityEvaluator {
public:
    QualityEvaluator(const DistanceMatrix& dm_hi, QualityMetric metric, std::size_t k = kDefaultQualityK);

    QualityScore score(const RowMatrix& projection) const;
    QualityMetric metric() const noexcept { return metric_; }
    std::size_t k() const noexcept { return k_; }

private:
    QualityMetric metric_;
    std::size_t k_;
    DistanceMatrix dm_hi_;
    std::optional<RankMatrix> rank_hi_;
};

QualityScore evaluate_quality(const RowMatrix& hi, const RowMatrix& lo, QualityMetric metric,
                              std::size_t k = kDefaultQualityK);

}  // namespace dradapt
