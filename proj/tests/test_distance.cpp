#include <doctest.h>

#include "dradapt/distance.hpp"
#include "dradapt/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dradapt;

TEST_CASE("pairwise distances match the dense oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const RowMatrix x = fixture::gaussian(15 + seed, 1 + seed % 5, seed);
        const auto dm = pairwise_distances(x);
        const auto ref = oracle::distances(x);
        for (std::size_t i = 0; i < dm.size(); ++i)
            for (std::size_t j = 0; j < dm.size(); ++j) CHECK(dm(i, j) == doctest::Approx(ref[i][j]).epsilon(1e-14));
        // Symmetry is exact, not approximate.
        CHECK(dm.matrix() == dm.matrix().transpose());
    }
}

TEST_CASE("condensed form lists the upper triangle row by row") {
    RowMatrix x(3, 1);
    x << 0.0, 1.0, 3.0;
    CHECK(pairwise_distances(x).condensed() == std::vector<double>{1.0, 3.0, 2.0});
}

TEST_CASE("DistanceMatrix validation") {
    RowMatrix d = RowMatrix::Zero(3, 3);
    d(0, 1) = 1.0;
    CHECK_THROWS_AS(DistanceMatrix{d}, ValidationError);  // asymmetric
    d(1, 0) = 1.0;
    CHECK_NOTHROW(DistanceMatrix{d});
    d(2, 2) = 0.5;
    CHECK_THROWS_AS(DistanceMatrix{d}, ValidationError);
    CHECK_THROWS_AS(DistanceMatrix{RowMatrix::Zero(3, 2)}, ValidationError);
    RowMatrix neg = RowMatrix::Zero(3, 3);
    neg(0, 2) = neg(2, 0) = -1.0;
    CHECK_THROWS_AS(DistanceMatrix{neg}, ValidationError);
}

TEST_CASE("neighbor ranking breaks ties by index") {
    // Point 0 at the origin, points 1..4 all at distance 1.
    RowMatrix x(5, 2);
    x << 0, 0, 1, 0, 0, 1, -1, 0, 0, -1;
    const auto nr = neighbor_ranking(pairwise_distances(x), 3);
    CHECK(nr.neighbor(0, 0) == 1);
    CHECK(nr.neighbor(0, 1) == 2);
    CHECK(nr.neighbor(0, 2) == 3);
    CHECK(nr.neighbor(1, 0) == 0);
    CHECK_THROWS_AS(neighbor_ranking(pairwise_distances(x), 5), ValidationError);
    CHECK_THROWS_AS(neighbor_ranking(pairwise_distances(x), 0), ValidationError);
}

TEST_CASE("rank matrix matches the counting oracle, ties included") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const RowMatrix x = seed % 2 ? fixture::gaussian(11, 3, seed) : fixture::lattice(11, 2, 3, seed);
        const auto dm = pairwise_distances(x);
        const auto rm = rank_matrix(dm);
        const auto ref = oracle::ranks(oracle::distances(x));
        const auto nr = neighbor_ranking(dm, 10);
        for (std::size_t i = 0; i < 11; ++i) {
            for (std::size_t j = 0; j < 11; ++j) CHECK(rm(i, j) == ref[i][j]);
            for (std::size_t r = 0; r < 10; ++r) {
                CHECK(rm(i, static_cast<std::size_t>(rm.by_rank(i, r))) == static_cast<int>(r) + 1);
                CHECK(nr.neighbor(i, r) == rm.by_rank(i, r));
            }
        }
    }
}

TEST_CASE("distance cache round trip") {
    const auto dir = fixture::scratch("cache");
    const Dataset ds(fixture::gaussian(30, 5, 2));
    const auto first = cached_pairwise_distances(ds, dir);
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
    const auto second = cached_pairwise_distances(ds, dir);
    CHECK(first.matrix() == second.matrix());
    CHECK(second.matrix() == pairwise_distances(ds).matrix());

    fixture::write_file(dir / "junk.dist", "abc");
    CHECK_THROWS_AS(read_distance_cache(dir / "junk.dist"), ParseError);
}
