#include <doctest.h>

#include <cmath>

#include "dradapt/drtech.hpp"
#include "dradapt/error.hpp"
#include "dradapt/quality.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dradapt;

namespace {

const std::string kPlugins = DRADAPT_TEST_PLUGINS;

TechniqueDescriptor plugin(const std::string& script, HyperparamSpace space = {}) {
    TechniqueRegistry registry;
    registry.register_external(script, {{"python3", kPlugins + "/" + script + ".py"}, std::move(space)});
    return registry.find(script);
}

HyperparamAssignment default_params(const std::string& id, std::size_t n) {
    HyperparamAssignment h;
    for (const auto& d : hyperparameter_space(id, n).dims) {
        h[d.name] = d.type == ParamType::Integer ? std::round(0.5 * (d.lower + d.upper)) : 0.5 * (d.lower + d.upper);
    }
    if (id == technique_id::kTsne) h["n_iter"] = 300;
    return h;
}

}  // namespace

TEST_CASE("PCA equals the eigendecomposition oracle up to axis sign") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RowMatrix x = fixture::gaussian(50, 6, seed);
        // Distinct variances keep the principal axes well separated.
        for (Eigen::Index c = 0; c < 6; ++c) x.col(c) *= 1.0 + static_cast<double>(c);
        const RowMatrix y = pca_project(x);
        const RowMatrix ref = oracle::pca_scores(x);
        for (Eigen::Index c = 0; c < 2; ++c) {
            const double same = (y.col(c) - ref.col(c)).norm();
            const double flipped = (y.col(c) + ref.col(c)).norm();
            CHECK(std::min(same, flipped) <= 1e-9 * ref.col(c).norm());
        }
    }
}

TEST_CASE("PCA handles more dimensions than points and one-dimensional input") {
    const RowMatrix wide = fixture::gaussian(10, 40, 2);
    const RowMatrix y = pca_project(wide);
    const RowMatrix ref = oracle::pca_scores(wide);
    for (Eigen::Index c = 0; c < 2; ++c)
        CHECK(std::min((y.col(c) - ref.col(c)).norm(), (y.col(c) + ref.col(c)).norm()) <= 1e-8 * ref.col(c).norm());
    const RowMatrix line = pca_project(fixture::gaussian(10, 1, 3));
    CHECK(line.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("classical MDS reproduces planar distances") {
    const RowMatrix x = fixture::gaussian(30, 2, 4);
    const auto dm = pairwise_distances(x);
    const RowMatrix y = classical_mds(dm.matrix(), 1.0);
    const auto dy = pairwise_distances(y);
    CHECK((dy.matrix() - dm.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("t-SNE analytic gradient matches central differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const RowMatrix x = fixture::gaussian(20, 5, seed);
        const RowMatrix p = tsne_joint_probabilities(pairwise_distances(x), 5.0);
        const RowMatrix y = fixture::gaussian(20, 2, seed + 500);
        const RowMatrix g = tsne_gradient(p, y);
        const RowMatrix ng =
            oracle::numeric_gradient([&](const RowMatrix& yy) { return tsne_kl_divergence(p, yy); }, y, 1e-5);
        CHECK((g - ng).norm() / ng.norm() <= 1e-4);
    }
}

TEST_CASE("t-SNE joint probabilities") {
    const RowMatrix p = tsne_joint_probabilities(pairwise_distances(fixture::gaussian(30, 4, 1)), 8.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p == p.transpose());
    CHECK(p.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(tsne_joint_probabilities(pairwise_distances(fixture::gaussian(30, 4, 1)), 30.0), ValidationError);
}

TEST_CASE("Isomap recovers a swiss roll better than PCA") {
    const Dataset roll = generate_synthetic({SyntheticKind::SwissRoll, 500, 3, {}, 5});
    const double iso = evaluate_quality(roll.points(), isomap_project(roll, 10), QualityMetric::Tnc, 10).value;
    const double lin = evaluate_quality(roll.points(), pca_project(roll.points()), QualityMetric::Tnc, 10).value;
    MESSAGE("isomap T&C F1 " << iso << ", pca " << lin);
    CHECK(iso > lin);
}

TEST_CASE("Isomap joins disconnected neighborhood graphs") {
    RowMatrix x = fixture::gaussian(40, 3, 3);
    x.bottomRows(20).array() += 1000.0;
    const RowMatrix g = geodesic_distances(pairwise_distances(x), 5);
    CHECK(g.allFinite());
    CHECK(g == g.transpose());
    CHECK(g(0, 39) >= 900.0);
    CHECK(isomap_project(Dataset(x), 5).allFinite());
}

TEST_CASE("every built-in is deterministic and yields N x 2 output") {
    const Dataset ds(fixture::gaussian(60, 5, 8));
    const TechniqueRegistry registry;
    for (const auto& t : registry.list()) {
        const auto h = default_params(t.id, ds.size());
        const Projection a = project(t, ds, h, 42);
        const Projection b = project(t, ds, h, 42);
        CHECK(a.points().rows() == 60);
        CHECK(a.points() == b.points());
    }
}

TEST_CASE("t-SNE depends on the seed") {
    const Dataset ds(fixture::gaussian(40, 5, 8));
    const auto& t = TechniqueRegistry().find(technique_id::kTsne);
    const auto h = default_params(t.id, ds.size());
    CHECK(project(t, ds, h, 1).points() != project(t, ds, h, 2).points());
}

TEST_CASE("declared hyperparameter spaces") {
    CHECK(hyperparameter_space("pca", 100).empty());
    const auto tsne = hyperparameter_space("tsne-exact", 100);
    REQUIRE(tsne.size() == 3);
    CHECK(tsne.dims[0].name == "perplexity");
    CHECK(tsne.dims[0].upper == 33.0);
    CHECK(tsne.dims[1].type == ParamType::LogReal);
    CHECK(tsne.dims[2].lower == 250.0);
    CHECK(tsne.dims[2].upper == 1000.0);
    CHECK(hyperparameter_space("tsne-exact", 3000).dims[0].upper == 100.0);
    const auto lle = hyperparameter_space("lle", 100);
    CHECK(lle.dims[0].upper == 25.0);
    CHECK(lle.dims[1].lower == 1e-4);
    CHECK(hyperparameter_space("lle", 3000).dims[0].upper == 100.0);
    CHECK_FALSE(hyperparameter_space("mds-classical", 100).empty());
    CHECK_THROWS_AS(hyperparameter_space("umap", 100), LookupError);
    // Stable across calls.
    CHECK(to_json(hyperparameter_space("isomap", 77)) == to_json(hyperparameter_space("isomap", 77)));
}

TEST_CASE("precondition failures") {
    const Dataset ds(fixture::gaussian(30, 3, 1));
    const TechniqueRegistry registry;
    CHECK_THROWS_AS(project(registry.find("isomap"), ds, {{"n_neighbors", 30}}, 0), ValidationError);
    CHECK_THROWS_AS(project(registry.find("lle"), ds, {{"n_neighbors", 40}, {"regularization", 1e-3}}, 0),
                    ValidationError);
    CHECK_THROWS_AS(project(registry.find("mds-classical"), ds, {{"distance_power", 9.0}}, 0), ValidationError);
    CHECK_THROWS_AS(project(registry.find("mds-classical"), ds, {}, 0), ValidationError);
    CHECK_THROWS_AS(registry.find("umap"), LookupError);
    CHECK_THROWS_AS(Projection(RowMatrix::Zero(4, 3)), ValidationError);
}

TEST_CASE("external plugin protocol") {
    const Dataset ds(fixture::gaussian(12, 3, 4));

    SUBCASE("echo stub round trip") {
        const auto t = plugin("echo", {{{"scale", ParamType::Real, 0.5, 4.0}}});
        const Projection p = project(t, ds, {{"scale", 2.0}}, 7);
        CHECK(p.points() == RowMatrix(2.0 * ds.points().leftCols(2)));
    }
    SUBCASE("wrong row count") {
        const auto t = plugin("short");
        CHECK_THROWS_AS(project(t, ds, {}, 7), ExternalTechniqueError);
    }
    SUBCASE("non-zero exit") {
        const auto t = plugin("fail");
        try {
            project(t, ds, {}, 7);
            FAIL("expected ExternalTechniqueError");
        } catch (const ExternalTechniqueError& e) {
            CHECK(e.exit_code() == 1);
            CHECK(e.diagnostics().find("stub failure") != std::string::npos);
        }
    }
    SUBCASE("missing executable") {
        TechniqueRegistry registry;
        registry.register_external("ghost", {{"/nonexistent/plugin"}, {}});
        CHECK_THROWS_AS(project(registry.find("ghost"), ds, {}, 7), ExternalTechniqueError);
    }
    SUBCASE("descriptor files") {
        const auto dir = fixture::scratch("descriptor");
        fixture::write_file(dir / "echo.json", R"({"id": "echo", "command": ["python3", ")" + kPlugins +
                                                   R"(/echo.py"], "space": [{"name": "scale", "type": "real", "lower": 1, "upper": 2}]})");
        TechniqueRegistry registry;
        register_external_from_file(registry, dir / "echo.json");
        CHECK(registry.find("echo").space_for(5).size() == 1);
        CHECK_THROWS_AS(register_external_from_file(registry, dir / "echo.json"), ValidationError);
    }
}
