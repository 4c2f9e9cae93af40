#include "dradapt/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dradapt/error.hpp"

namespace dradapt {
namespace {

void check_same_size(const RankMatrix& a, const RankMatrix& b) {
    if (a.size() != b.size()) {
        throw ValidationError("rank matrices differ in size (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
}

// Sum over i of rank excess of points in `lo`'s k-neighborhood missing from `hi`'s.
double intrusion_penalty(const RankMatrix& hi, const RankMatrix& lo, std::size_t k) {
    const std::size_t n = hi.size();
    const auto kk = static_cast<std::int32_t>(k);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < k; ++r) {
            const auto j = static_cast<std::size_t>(lo.by_rank(i, r));
            const std::int32_t rh = hi(i, j);
            if (rh > kk) total += rh - kk;
        }
    }
    return total;
}

}  // namespace

double trustworthiness(const RankMatrix& rank_hi, const RankMatrix& rank_lo, std::size_t k) {
    check_same_size(rank_hi, rank_lo);
    const std::size_t n = rank_hi.size();
    if (k < 1 || 2 * k >= n) {
        throw ValidationError("T&C needs 1 <= k < N/2 (k=" + std::to_string(k) + ", N=" +
                              std::to_string(n) + ")");
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double norm = 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0));
    return 1.0 - norm * intrusion_penalty(rank_hi, rank_lo, k);
}

double continuity(const RankMatrix& rank_hi, const RankMatrix& rank_lo, std::size_t k) {
    return trustworthiness(rank_lo, rank_hi, k);
}

double f1_score(double a, double b) {
    const double s = a + b;
    return s == 0.0 ? 0.0 : 2.0 * a * b / s;
}

MrrePair mrre(const RankMatrix& rank_hi, const RankMatrix& rank_lo, std::size_t k) {
    check_same_size(rank_hi, rank_lo);
    const std::size_t n = rank_hi.size();
    if (k < 1 || k + 1 >= n) {
        throw ValidationError("MRRE needs 1 <= k < N-1 (k=" + std::to_string(k) + ", N=" +
                              std::to_string(n) + ")");
    }
    double missing = 0.0;
    double false_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < k; ++r) {
            // High-dim neighbor holding rank r+1: its displacement relative to r+1.
            const auto jh = static_cast<std::size_t>(rank_hi.by_rank(i, r));
            missing += std::abs(static_cast<double>(rank_hi(i, jh) - rank_lo(i, jh))) /
                       static_cast<double>(rank_hi(i, jh));
            const auto jl = static_cast<std::size_t>(rank_lo.by_rank(i, r));
            false_ += std::abs(static_cast<double>(rank_hi(i, jl) - rank_lo(i, jl))) /
                      static_cast<double>(rank_lo(i, jl));
        }
    }
    const double nd = static_cast<double>(n);
    double worst = 0.0;
    for (std::size_t r = 1; r <= k; ++r)
        worst += std::abs(nd - 2.0 * static_cast<double>(r) + 1.0) / static_cast<double>(r);
    worst *= nd;
    return {std::max(0.0, 1.0 - missing / worst), std::max(0.0, 1.0 - false_ / worst)};
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && values[order[end]] == values[order[start]]) ++end;
        // Positions start..end-1 share ranks start+1..end.
        const double avg = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t p = start; p < end; ++p) ranks[order[p]] = avg;
        start = end;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("correlation inputs differ in length");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw DegenerateInput("correlation undefined: zero variance");
    return std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
}

namespace {

void check_pair(const DistanceMatrix& a, const DistanceMatrix& b) {
    if (a.size() != b.size()) {
        throw ValidationError("distance matrices differ in size (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    if (a.size() < 3) throw ValidationError("correlation metrics need N >= 3");
}

}  // namespace

double spearman_rho(const DistanceMatrix& dm_hi, const DistanceMatrix& dm_lo) {
    check_pair(dm_hi, dm_lo);
    return pearson(average_ranks(dm_hi.condensed()), average_ranks(dm_lo.condensed()));
}

double pearson_r(const DistanceMatrix& dm_hi, const DistanceMatrix& dm_lo) {
    check_pair(dm_hi, dm_lo);
    return pearson(dm_hi.condensed(), dm_lo.condensed());
}

// ---------------------------------------------------------------------------

QualityMetric parse_quality_metric(const std::string& id) {
    if (id == "tnc" || id == "tnc-f1") return QualityMetric::Tnc;
    if (id == "mrre" || id == "mrre-f1") return QualityMetric::Mrre;
    if (id == "spearman" || id == "spearman-rho") return QualityMetric::Spearman;
    if (id == "pearson" || id == "pearson-r") return QualityMetric::Pearson;
    throw LookupError("unknown quality metric '" + id + "'");
}

std::string to_string(QualityMetric m) {
    switch (m) {
        case QualityMetric::Tnc: return "tnc";
        case QualityMetric::Mrre: return "mrre";
        case QualityMetric::Spearman: return "spearman";
        case QualityMetric::Pearson: return "pearson";
    }
    return "?";
}

bool is_local(QualityMetric m) { return m == QualityMetric::Tnc || m == QualityMetric::Mrre; }

std::pair<double, double> metric_range(QualityMetric m) {
    return is_local(m) ? std::pair{0.0, 1.0} : std::pair{-1.0, 1.0};
}

QualityEvaluator::QualityEvaluator(const DistanceMatrix& dm_hi, QualityMetric metric, std::size_t k)
    : metric_(metric), k_(k), dm_hi_(dm_hi) {
    if (is_local(metric_)) rank_hi_.emplace(rank_matrix(dm_hi_));
}

QualityScore QualityEvaluator::score(const RowMatrix& projection) const {
    if (static_cast<std::size_t>(projection.rows()) != dm_hi_.size()) {
        throw ValidationError("projection has " + std::to_string(projection.rows()) +
                              " rows, expected " + std::to_string(dm_hi_.size()));
    }
    const DistanceMatrix dm_lo = pairwise_distances(projection);
    switch (metric_) {
        case QualityMetric::Tnc: {
            const RankMatrix lo = rank_matrix(dm_lo);
            const double t = trustworthiness(*rank_hi_, lo, k_);
            const double c = continuity(*rank_hi_, lo, k_);
            return {metric_, tnc_f1(t, c), k_, std::pair{t, c}};
        }
        case QualityMetric::Mrre: {
            const RankMatrix lo = rank_matrix(dm_lo);
            const MrrePair m = mrre(*rank_hi_, lo, k_);
            return {metric_, mrre_f1(m.missing, m.false_), k_, std::pair{m.missing, m.false_}};
        }
        case QualityMetric::Spearman:
            return {metric_, spearman_rho(dm_hi_, dm_lo), std::nullopt, std::nullopt};
        case QualityMetric::Pearson:
            return {metric_, pearson_r(dm_hi_, dm_lo), std::nullopt, std::nullopt};
    }
    throw ValidationError("unknown metric");
}

QualityScore evaluate_quality(const RowMatrix& hi, const RowMatrix& lo, QualityMetric metric,
                              std::size_t k) {
    if (hi.rows() != lo.rows()) {
        throw ValidationError("high- and low-dimensional tables differ in row count (" +
                              std::to_string(hi.rows()) + " vs " + std::to_string(lo.rows()) + ")");
    }
    return QualityEvaluator(pairwise_distances(hi), metric, k).score(lo);
}

}  // namespace dradapt
