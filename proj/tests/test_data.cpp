#include <doctest.h>

#include "dradapt/data.hpp"
#include "dradapt/error.hpp"
#include "support/fixtures.hpp"

using namespace dradapt;

TEST_CASE("load_dataset parses a plain numeric table") {
    const auto dir = fixture::scratch("plain");
    fixture::write_file(dir / "a.csv", "1,2,3\n4,5,6\n7,8,9\n10,11,12\n");
    const Dataset ds = load_dataset(dir / "a.csv");
    CHECK(ds.size() == 4);
    CHECK(ds.dim() == 3);
    CHECK_FALSE(ds.labels().has_value());
    CHECK(ds.points()(3, 2) == 12.0);
}

TEST_CASE("label_column=last splits off integer labels") {
    const auto dir = fixture::scratch("labels");
    fixture::write_file(dir / "a.csv", "1,2,0\n4,5,1\n7,8,1\n10,11,2\n");
    CsvOptions opts;
    opts.label_column = "last";
    const Dataset ds = load_dataset(dir / "a.csv", opts);
    CHECK(ds.dim() == 2);
    REQUIRE(ds.labels().has_value());
    CHECK(*ds.labels() == std::vector<int>{0, 1, 1, 2});
}

TEST_CASE("label column by header name") {
    const std::string text = "x,cls,y\n1,3,2\n4,3,5\n7,4,8\n";
    CsvOptions opts;
    opts.has_header = true;
    opts.label_column = "cls";
    const Dataset ds = parse_dataset(text, opts);
    CHECK(ds.dim() == 2);
    CHECK(ds.points()(1, 1) == 5.0);
    CHECK(*ds.labels() == std::vector<int>{3, 3, 4});
}

TEST_CASE("malformed tables are rejected") {
    CHECK_THROWS_AS(parse_dataset("1,2,3\n4,5\n7,8,9\n"), ParseError);
    CHECK_THROWS_AS(parse_dataset("1,2,3\n4,x,6\n7,8,9\n"), ParseError);
    CHECK_THROWS_AS(parse_dataset("1,2\n3,4\n"), ValidationError);
    CHECK_THROWS_AS(parse_dataset("1,nan\n3,4\n5,6\n"), ValidationError);
    CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("quoted fields and alternate delimiters") {
    CsvOptions opts;
    opts.delimiter = ';';
    const Dataset ds = parse_dataset("\"1.5\";2\n3;4\n5;6\n", opts);
    CHECK(ds.points()(0, 0) == 1.5);
}

TEST_CASE("Dataset invariants") {
    CHECK_THROWS_AS(Dataset(RowMatrix::Zero(2, 3)), ValidationError);
    CHECK_THROWS_AS(Dataset(RowMatrix::Zero(3, 0)), ValidationError);
    CHECK_THROWS_AS(Dataset(RowMatrix::Zero(3, 2), std::vector<int>{1, 2}), ValidationError);
    RowMatrix bad = RowMatrix::Zero(3, 2);
    bad(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Dataset{bad}, ValidationError);
}

TEST_CASE("write and reload round-trips every double exactly") {
    const Dataset ds(fixture::gaussian(20, 4, 3), std::nullopt, "g");
    const auto dir = fixture::scratch("roundtrip");
    write_dataset(ds, dir / "g.csv");
    const Dataset back = load_dataset(dir / "g.csv");
    CHECK(back.points() == ds.points());
    CHECK(back.content_hash() == ds.content_hash());
}

TEST_CASE("subsample") {
    SyntheticSpec spec{SyntheticKind::GaussianMixture, 5000, 3, {}, 11};
    const Dataset big = generate_synthetic(spec);

    SUBCASE("caps at max_n") {
        const Dataset s = subsample(big, 3000, 1);
        CHECK(s.size() == 3000);
        CHECK(s.labels()->size() == 3000);
    }
    SUBCASE("no-op when small enough") {
        const Dataset small(fixture::gaussian(100, 2, 1));
        const Dataset s = subsample(small, 3000, 1);
        CHECK(s.points() == small.points());
    }
    SUBCASE("deterministic and label-consistent") {
        const Dataset a = subsample(big, 50, 9);
        const Dataset b = subsample(big, 50, 9);
        CHECK(a.points() == b.points());
        CHECK(*a.labels() == *b.labels());
        // Every sampled row exists in the source with the matching label.
        for (Eigen::Index i = 0; i < a.points().rows(); ++i) {
            bool found = false;
            for (Eigen::Index j = 0; j < big.points().rows() && !found; ++j) {
                found = big.points().row(j) == a.points().row(i) &&
                        (*big.labels())[static_cast<std::size_t>(j)] == (*a.labels())[static_cast<std::size_t>(i)];
            }
            CHECK(found);
        }
        CHECK(subsample(big, 50, 10).points() != a.points());
    }
    SUBCASE("rejects max_n < 3") { CHECK_THROWS_AS(subsample(big, 2, 0), ValidationError); }
}

TEST_CASE("generate_synthetic shape contracts") {
    const Dataset g = generate_synthetic({SyntheticKind::IidGaussian, 500, 2, {}, 7});
    CHECK(g.size() == 500);
    CHECK(g.dim() == 2);
    CHECK_FALSE(g.labels().has_value());

    const Dataset m = generate_synthetic({SyntheticKind::GaussianMixture, 90, 5, {{"components", 3}}, 7});
    REQUIRE(m.labels().has_value());
    CHECK(*std::max_element(m.labels()->begin(), m.labels()->end()) == 2);

    const Dataset skewed =
        generate_synthetic({SyntheticKind::GaussianMixture, 100, 3, {{"components", 3}, {"imbalance", 4.0}}, 7});
    std::vector<int> sizes(3, 0);
    for (int l : *skewed.labels()) ++sizes[static_cast<std::size_t>(l)];
    // Shares 16:4:1 of the 97 points left after one per component.
    CHECK(sizes == std::vector<int>{75, 19, 6});
    CHECK_THROWS_AS(generate_synthetic({SyntheticKind::GaussianMixture, 30, 3, {{"imbalance", 0.5}}, 7}),
                    ValidationError);

    const Dataset u = generate_synthetic({SyntheticKind::IidUniform, 50, 3, {}, 1});
    CHECK(u.points().minCoeff() >= 0.0);
    CHECK(u.points().maxCoeff() < 1.0);

    const Dataset h = generate_synthetic({SyntheticKind::HyperplaneEmbedded, 40, 10, {{"intrinsic_dim", 2}}, 3});
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h.points());
    CHECK(svd.singularValues()(2) < 1e-9 * svd.singularValues()(0));

    CHECK_THROWS_AS(generate_synthetic({SyntheticKind::SwissRoll, 50, 2, {}, 1}), ValidationError);
    CHECK_THROWS_AS(parse_synthetic_kind("spiral"), ValidationError);
    CHECK_THROWS_AS(generate_synthetic({SyntheticKind::IidGaussian, 2, 2, {}, 1}), ValidationError);
}

TEST_CASE("generate_synthetic is a pure function of the spec") {
    for (auto kind : {SyntheticKind::IidGaussian, SyntheticKind::IidUniform, SyntheticKind::GaussianMixture,
                      SyntheticKind::SwissRoll, SyntheticKind::HyperplaneEmbedded}) {
        const SyntheticSpec spec{kind, 60, 4, {}, 99};
        CHECK(generate_synthetic(spec).points() == generate_synthetic(spec).points());
        SyntheticSpec other = spec;
        other.seed = 100;
        CHECK(generate_synthetic(spec).points() != generate_synthetic(other).points());
        CHECK(parse_synthetic_kind(to_string(kind)) == kind);
    }
}

TEST_CASE("standardize gives zero mean and unit variance") {
    RowMatrix x = fixture::gaussian(40, 3, 5);
    x.col(1) *= 1000.0;
    x.col(2).setConstant(4.0);
    const Dataset z = standardize(Dataset(x));
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK(std::abs(z.points().col(c).mean()) < 1e-12);
        CHECK(std::sqrt(z.points().col(c).array().square().mean()) == doctest::Approx(1.0));
    }
    CHECK(z.points().col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("manifests mix CSV paths and inline synthetic specs") {
    const auto dir = fixture::scratch("manifest");
    fixture::write_file(dir / "a.csv", "1,2,0\n3,4,1\n5,7,0\n");
    fixture::write_file(dir / "m.json", R"({"datasets": [
        {"path": "a.csv", "label_column": "last"},
        {"name": "roll", "synthetic": {"kind": "swiss-roll", "n": 30, "d": 3, "seed": 4}}
    ]})");
    const auto entries = load_manifest(dir / "m.json");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].name == "a");
    const Dataset a = materialize(entries[0]);
    CHECK(a.dim() == 2);
    CHECK(a.labels().has_value());
    const Dataset roll = materialize(entries[1]);
    CHECK(roll.name() == "roll");
    CHECK(roll.size() == 30);

    fixture::write_file(dir / "bad.json", R"([{"name": "x"}])");
    CHECK_THROWS_AS(load_manifest(dir / "bad.json"), ParseError);
}
