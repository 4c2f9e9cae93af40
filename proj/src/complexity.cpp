#include "dradapt/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "dradapt/error.hpp"
#include "dradapt/parallel.hpp"

namespace dradapt {

std::vector<double> FeatureVector::values() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.value);
    return out;
}

std::vector<std::string> FeatureVector::tags() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        out.push_back(e.metric == ComplexityMetric::Pds ? std::string("PDS")
                                                        : "MNC(" + std::to_string(*e.k) + ")");
    }
    return out;
}

double pds(const DistanceMatrix& dm) {
    const std::size_t n = dm.size();
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sum += dm(i, j);
    const double mean = sum / pairs;

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dev = dm(i, j) - mean;
            ss += dev * dev;
        }
    }
    const double sd = std::sqrt(ss / pairs);

    // Relative cutoff absorbs the rounding left over from equal distances.
    if (!(mean > 0.0) || sd <= 1e-12 * mean) {
        throw DegenerateInput("complexity undefined: zero distance variance");
    }
    return std::log(sd / mean);
}

// ---------------------------------------------------------------------------

double SimilarityRow::at(std::size_t j) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), static_cast<std::int32_t>(j),
                                     [](const auto& e, std::int32_t idx) { return e.first < idx; });
    return (it != entries.end() && it->first == static_cast<std::int32_t>(j)) ? it->second : 0.0;
}

double SimilarityRow::squared_norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.second * e.second;
    return s;
}

std::vector<SimilarityRow> knn_similarity_matrix(const NeighborRanking& nr) {
    const std::size_t n = nr.size();
    const std::size_t k = nr.k();
    std::vector<SimilarityRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].owner = i;
        rows[i].entries.reserve(k);
        for (std::size_t r = 0; r < k; ++r)
            rows[i].entries.emplace_back(nr.neighbor(i, r), static_cast<double>(k - r));
        std::sort(rows[i].entries.begin(), rows[i].entries.end());
    }
    return rows;
}

namespace {

struct ReverseEntry {
    std::int32_t owner;
    std::int32_t position;  // zero-based neighbor position in owner's row
};

// For each point p, the (owner, position) pairs where p appears in a kNN list.
std::vector<std::vector<ReverseEntry>> reverse_neighbors(const NeighborRanking& nr) {
    std::vector<std::vector<ReverseEntry>> rev(nr.size());
    for (std::size_t j = 0; j < nr.size(); ++j)
        for (std::size_t r = 0; r < nr.k(); ++r)
            rev[static_cast<std::size_t>(nr.neighbor(j, r))].push_back(
                {static_cast<std::int32_t>(j), static_cast<std::int32_t>(r)});
    return rev;
}

// Dense scratch row reset through its touched list.
struct Accumulator {
    std::vector<double> values;
    std::vector<std::int32_t> touched;

    void resize(std::size_t n) {
        if (values.size() != n) {
            values.assign(n, 0.0);
            touched.clear();
        }
    }
    void add(std::int32_t j, double v) {
        if (values[static_cast<std::size_t>(j)] == 0.0) touched.push_back(j);
        values[static_cast<std::size_t>(j)] += v;
    }
    void clear() {
        for (auto j : touched) values[static_cast<std::size_t>(j)] = 0.0;
        touched.clear();
    }
};

// Fills acc with SNN row i. Weights are positive so "0 means untouched" holds.
void accumulate_snn_row(const NeighborRanking& nr, const std::vector<std::vector<ReverseEntry>>& rev,
                        std::size_t i, Accumulator& acc) {
    const auto k = static_cast<double>(nr.k());
    for (std::size_t m = 0; m < nr.k(); ++m) {
        const auto shared = static_cast<std::size_t>(nr.neighbor(i, m));
        const double wi = k - static_cast<double>(m);
        for (const auto& e : rev[shared]) {
            if (static_cast<std::size_t>(e.owner) == i) continue;
            acc.add(e.owner, wi * (k - static_cast<double>(e.position)));
        }
    }
}

}  // namespace

std::vector<SimilarityRow> snn_similarity_matrix(const NeighborRanking& nr) {
    const std::size_t n = nr.size();
    const auto rev = reverse_neighbors(nr);
    std::vector<SimilarityRow> rows(n);
    parallel_for(n, [&](std::size_t i) {
        thread_local Accumulator acc;
        acc.resize(n);
        accumulate_snn_row(nr, rev, i, acc);
        rows[i].owner = i;
        for (auto j : acc.touched) rows[i].entries.emplace_back(j, acc.values[static_cast<std::size_t>(j)]);
        std::sort(rows[i].entries.begin(), rows[i].entries.end());
        acc.clear();
    });
    return rows;
}

double row_cosine(const SimilarityRow& a, const SimilarityRow& b) {
    double dot = 0.0;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    const double na = a.squared_norm();
    const double nb = b.squared_norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double mnc(const NeighborRanking& nr) {
    const std::size_t n = nr.size();
    const std::size_t k = nr.k();
    const auto rev = reverse_neighbors(nr);

    // ||kNN row||^2 = sum_{w=1..k} w^2, identical for every point.
    const double kd = static_cast<double>(k);
    const double knn_norm = std::sqrt(kd * (kd + 1.0) * (2.0 * kd + 1.0) / 6.0);

    std::vector<double> cosines(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        thread_local Accumulator acc;
        acc.resize(n);
        accumulate_snn_row(nr, rev, i, acc);

        double snn_sq = 0.0;
        for (auto j : acc.touched) {
            const double v = acc.values[static_cast<std::size_t>(j)];
            snn_sq += v * v;
        }
        double dot = 0.0;
        for (std::size_t r = 0; r < k; ++r)
            dot += (kd - static_cast<double>(r)) * acc.values[static_cast<std::size_t>(nr.neighbor(i, r))];
        acc.clear();

        // A point sharing no neighbor with anyone has cosine 0.
        cosines[i] = snn_sq == 0.0 ? 0.0 : dot / (knn_norm * std::sqrt(snn_sq));
    });

    double total = 0.0;
    for (double c : cosines) total += c;
    return std::clamp(total / static_cast<double>(n), 0.0, 1.0);
}

double mnc(const DistanceMatrix& dm, std::size_t k) { return mnc(neighbor_ranking(dm, k)); }

double mnc(const Dataset& ds, std::size_t k) {
    if (k < 1 || k >= ds.size()) {
        throw ValidationError("MNC needs 1 <= k <= N-1 (k=" + std::to_string(k) +
                              ", N=" + std::to_string(ds.size()) + ")");
    }
    return mnc(pairwise_distances(ds), k);
}

FeatureVector complexity_features(const DistanceMatrix& dm, const std::vector<std::size_t>& ks) {
    const std::size_t n = dm.size();
    std::size_t kmax = 0;
    for (auto k : ks) {
        if (k < 1) throw ValidationError("MNC neighborhood sizes must be positive");
        kmax = std::max(kmax, k);
    }
    if (kmax >= n) {
        throw ValidationError("largest MNC k=" + std::to_string(kmax) + " needs more than " +
                              std::to_string(kmax) + " points, dataset has " + std::to_string(n));
    }

    FeatureVector fv;
    fv.entries.push_back({ComplexityMetric::Pds, pds(dm), std::nullopt});
    if (ks.empty()) return fv;

    // The largest ranking contains every smaller one as a row prefix.
    const NeighborRanking widest = neighbor_ranking(dm, kmax);
    for (auto k : ks) {
        std::vector<std::int32_t> nn(n * k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < k; ++r) nn[i * k + r] = widest.neighbor(i, r);
        fv.entries.push_back({ComplexityMetric::Mnc, mnc(NeighborRanking(k, std::move(nn), n)), k});
    }
    return fv;
}

FeatureVector complexity_features(const Dataset& ds, const std::vector<std::size_t>& ks) {
    for (auto k : ks) {
        if (k >= ds.size()) {
            throw ValidationError("largest MNC k=" + std::to_string(k) + " needs more points than N=" +
                                  std::to_string(ds.size()));
        }
    }
    return complexity_features(pairwise_distances(ds), ks);
}

}  // namespace dradapt
