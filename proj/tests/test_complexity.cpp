#include <doctest.h>

#include <cmath>

#include "dradapt/complexity.hpp"
#include "dradapt/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dradapt;

TEST_CASE("PDS matches the definition") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const RowMatrix x = fixture::gaussian(20, 1 + seed, seed);
        CHECK(pds(pairwise_distances(x)) == doctest::Approx(oracle::pds(oracle::distances(x))).epsilon(1e-12));
    }
}

TEST_CASE("PDS decreases under distance concentration") {
    const double low = pds(pairwise_distances(fixture::gaussian(300, 2, 1)));
    const double high = pds(pairwise_distances(fixture::gaussian(300, 300, 1)));
    CHECK(high < low);
    CHECK(high < 0.0);
}

TEST_CASE("PDS of an equilateral simplex is degenerate") {
    for (std::size_t n : {3, 5, 10}) {
        const RowMatrix simplex = RowMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        CHECK_THROWS_AS(pds(pairwise_distances(simplex)), DegenerateInput);
    }
    CHECK_THROWS_AS(pds(pairwise_distances(RowMatrix::Zero(4, 2))), DegenerateInput);
}

TEST_CASE("kNN similarity rows hold k - r + 1") {
    RowMatrix x(5, 1);
    x << 0.0, 1.0, 3.0, 6.0, 10.0;
    const auto rows = knn_similarity_matrix(neighbor_ranking(pairwise_distances(x), 2));
    // Point 0: nearest 1 (rank 1), then 2.
    CHECK(rows[0].at(1) == 2.0);
    CHECK(rows[0].at(2) == 1.0);
    CHECK(rows[0].at(3) == 0.0);
    CHECK(rows[0].at(0) == 0.0);
    CHECK(rows[0].squared_norm() == 5.0);
}

TEST_CASE("SNN similarity is symmetric with zero diagonal") {
    const RowMatrix x = fixture::gaussian(25, 3, 8);
    const auto nr = neighbor_ranking(pairwise_distances(x), 6);
    const auto snn = snn_similarity_matrix(nr);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(snn[i].at(i) == 0.0);
        for (std::size_t j = 0; j < 25; ++j) CHECK(snn[i].at(j) == snn[j].at(i));
    }
}

TEST_CASE("row_cosine") {
    SimilarityRow a{0, {{1, 1.0}, {2, 1.0}}};
    SimilarityRow b{0, {{1, 2.0}, {2, 2.0}}};
    SimilarityRow c{0, {{3, 5.0}}};
    SimilarityRow empty{0, {}};
    CHECK(row_cosine(a, b) == doctest::Approx(1.0));
    CHECK(row_cosine(a, c) == 0.0);
    CHECK(row_cosine(a, empty) == 0.0);
}

TEST_CASE("MNC matches the dense oracle") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 6 + seed % 7;
        const RowMatrix x = seed % 3 == 0 ? fixture::lattice(n, 2, 2, seed) : fixture::gaussian(n, 1 + seed % 6, seed);
        const auto dm = pairwise_distances(x);
        for (std::size_t k = 1; k < n; ++k) {
            CHECK(std::abs(mnc(dm, k) - oracle::mnc(oracle::distances(x), k)) <= 1e-12);
        }
    }
}

TEST_CASE("MNC range and scale invariance") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset ds(fixture::gaussian(40, 2 + seed, seed));
        const double v = mnc(ds, 7);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(mnc(ds.scaled(1e-3), 7) == v);
        CHECK(mnc(ds.scaled(1e3), 7) == v);
        CHECK(std::abs(pds(pairwise_distances(ds.scaled(1e3))) - pds(pairwise_distances(ds))) <= 1e-9);
    }
}

TEST_CASE("complexity_features ordering and arity") {
    const Dataset ds(fixture::gaussian(100, 4, 3));
    const FeatureVector fv = complexity_features(ds);
    CHECK(fv.size() == 4);
    CHECK(fv.tags() == std::vector<std::string>{"PDS", "MNC(25)", "MNC(50)", "MNC(75)"});
    const auto dm = pairwise_distances(ds);
    CHECK(fv.values()[0] == pds(dm));
    CHECK(fv.values()[2] == mnc(dm, 50));
    CHECK(fv.values()[3] == mnc(dm, 75));
    CHECK_THROWS_AS(complexity_features(Dataset(fixture::gaussian(60, 2, 1))), ValidationError);
    CHECK(complexity_features(dm, {}).size() == 1);
}
