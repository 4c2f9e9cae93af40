#include <limits>
#include <queue>

#include "dradapt/drtech.hpp"
#include "dradapt/error.hpp"
#include "dradapt/parallel.hpp"

namespace dradapt {
namespace {

struct Edge {
    std::size_t to;
    double weight;
};

using Graph = std::vector<std::vector<Edge>>;

void add_edge(Graph& g, std::size_t a, std::size_t b, double w) {
    for (const auto& e : g[a])
        if (e.to == b) return;
    g[a].push_back({b, w});
    g[b].push_back({a, w});
}

std::vector<int> components(const Graph& g) {
    std::vector<int> comp(g.size(), -1);
    int next = 0;
    for (std::size_t s = 0; s < g.size(); ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = next;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (const auto& e : g[v]) {
                if (comp[e.to] < 0) {
                    comp[e.to] = next;
                    stack.push_back(e.to);
                }
            }
        }
        ++next;
    }
    return comp;
}

}  // namespace

RowMatrix geodesic_distances(const DistanceMatrix& dm, std::size_t n_neighbors) {
    const std::size_t n = dm.size();
    const NeighborRanking nr = neighbor_ranking(dm, n_neighbors);
    Graph g(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < nr.k(); ++r) {
            const auto j = static_cast<std::size_t>(nr.neighbor(i, r));
            add_edge(g, i, j, dm(i, j));
        }
    }

    // Join the component holding point 0 to its nearest outside point until connected.
    for (auto comp = components(g);; comp = components(g)) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (comp[i] != comp[0]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (comp[j] != comp[0] && dm(i, j) < best) {
                    best = dm(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best == std::numeric_limits<double>::infinity()) break;
        add_edge(g, bi, bj, best);
    }

    RowMatrix geo(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, [&](std::size_t s) {
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[s] = 0.0;
        heap.emplace(0.0, s);
        while (!heap.empty()) {
            const auto [d, v] = heap.top();
            heap.pop();
            if (d > dist[v]) continue;
            for (const auto& e : g[v]) {
                const double nd = d + e.weight;
                if (nd < dist[e.to]) {
                    dist[e.to] = nd;
                    heap.emplace(nd, e.to);
                }
            }
        }
        for (std::size_t t = 0; t < n; ++t) geo(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = dist[t];
    });
    // Dijkstra from both ends may differ in the last ulp; keep the matrix exactly symmetric.
    for (Eigen::Index i = 0; i < geo.rows(); ++i)
        for (Eigen::Index j = i + 1; j < geo.cols(); ++j) geo(j, i) = geo(i, j);
    return geo;
}

RowMatrix isomap_project(const Dataset& ds, std::size_t n_neighbors) {
    if (n_neighbors < 1 || n_neighbors >= ds.size()) {
        throw ValidationError("isomap: n_neighbors must lie in [1, N-1]");
    }
    const RowMatrix geo = geodesic_distances(pairwise_distances(ds), n_neighbors);
    return classical_mds(geo, 1.0, technique_id::kIsomap);
}

}  // namespace dradapt
