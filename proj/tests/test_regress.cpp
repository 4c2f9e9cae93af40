#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dradapt/error.hpp"
#include "dradapt/regress.hpp"
#include "dradapt/rng.hpp"

using namespace dradapt;

namespace {

using Rows = std::vector<std::vector<double>>;

const RegressionKind kAllKinds[] = {RegressionKind::Linear, RegressionKind::Polynomial2, RegressionKind::Knn,
                                    RegressionKind::RandomForest};

Rows random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Rows x(n, std::vector<double>(d));
    for (auto& row : x)
        for (auto& v : row) v = rng.normal();
    return x;
}

std::vector<double> predict_all(const RegressionModel& m, const Rows& x) {
    std::vector<double> out;
    for (const auto& row : x) out.push_back(m.predict(row));
    return out;
}

}  // namespace

TEST_CASE("linear regression recovers exact linear targets") {
    const Rows x = random_rows(30, 4, 1);
    std::vector<double> y;
    for (const auto& r : x) y.push_back(0.3 - 2.0 * r[0] + 0.5 * r[1] + 7.0 * r[3]);
    const auto m = fit(RegressionKind::Linear, x, y, 0);
    CHECK(r2_score(y, predict_all(m, x)) >= 1.0 - 1e-9);
    CHECK(m.predict({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(5.8).epsilon(1e-9));
}

TEST_CASE("constant targets give constant predictions and R2 of 0") {
    const Rows x = random_rows(20, 3, 2);
    const std::vector<double> y(20, 0.7);
    for (auto kind : kAllKinds) {
        const auto m = fit(kind, x, y, 3);
        const auto p = predict_all(m, random_rows(10, 3, 9));
        for (double v : p) CHECK(v == doctest::Approx(0.7).epsilon(1e-9));
        CHECK(r2_score(y, predict_all(m, x)) == 0.0);
    }
}

TEST_CASE("polynomial2 fits a quadratic target") {
    const Rows x = random_rows(40, 3, 4);
    std::vector<double> y;
    for (const auto& r : x) y.push_back(r[1] * r[1] - 0.5 * r[0] * r[2] + 1.0);
    const auto m = fit(RegressionKind::Polynomial2, x, y, 0);
    CHECK(r2_score(y, predict_all(m, x)) >= 1.0 - 1e-6);
}

TEST_CASE("predict is a dot product for a hand-built linear model") {
    const nlohmann::json j = {{"kind", "linear"},   {"arity", 4},         {"residual_range", {0.0, 0.0}},
                              {"mean", {0, 0, 0, 0}}, {"scale", {1, 1, 1, 1}}, {"coef", {1, 0, 0, 0}},
                              {"intercept", 0.0}};
    const auto m = RegressionModel::from_json(j);
    CHECK(m.predict({-1.04, 0.8, 0.7, 0.6}) == -1.04);
    CHECK_THROWS_AS(m.predict({1.0, 2.0}), ValidationError);
}

TEST_CASE("knn exact hits") {
    const Rows x = random_rows(15, 2, 5);
    std::vector<double> y;
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(static_cast<double>(i));
    const auto m5 = fit(RegressionKind::Knn, x, y, 0);
    RegressionOptions one;
    one.knn_k = 1;
    const auto m1 = fit(RegressionKind::Knn, x, y, 0, one);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(m5.predict(x[i]) == y[i]);
        CHECK(m1.predict(x[i]) == y[i]);
    }
    // Off-sample predictions stay within the targets of the neighbors.
    const double p = m5.predict({0.1, -0.2});
    CHECK(p >= 0.0);
    CHECK(p <= 14.0);
}

TEST_CASE("random forest predictions stay within the target range") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Rows x = random_rows(40, 4, seed);
        Rng rng(seed + 100);
        std::vector<double> y;
        for (const auto& r : x) y.push_back(std::sin(r[0]) + 0.2 * rng.normal());
        const auto m = fit(RegressionKind::RandomForest, x, y, seed);
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        for (double v : predict_all(m, random_rows(50, 4, seed + 7))) {
            CHECK(v >= *lo);
            CHECK(v <= *hi);
        }
        CHECK(r2_score(y, predict_all(m, x)) > 0.5);
    }
}

TEST_CASE("every kind is deterministic under a fixed seed") {
    const Rows x = random_rows(25, 3, 6);
    std::vector<double> y;
    for (const auto& r : x) y.push_back(r[0] * r[1] + r[2]);
    const Rows q = random_rows(10, 3, 60);
    for (auto kind : kAllKinds) {
        const auto a = fit(kind, x, y, 11);
        const auto b = fit(kind, x, y, 11);
        CHECK(predict_all(a, q) == predict_all(b, q));
        CHECK(a.to_json() == b.to_json());
    }
    CHECK(predict_all(fit(RegressionKind::RandomForest, x, y, 11), q) !=
          predict_all(fit(RegressionKind::RandomForest, x, y, 12), q));
}

TEST_CASE("linear predictions are affine along a ray") {
    const Rows x = random_rows(20, 3, 7);
    Rng rng(70);
    std::vector<double> y;
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(rng.normal());
    const auto m = fit(RegressionKind::Linear, x, y, 0);
    const std::vector<double> v{0.4, -1.2, 2.0};
    auto at = [&](double a) {
        std::vector<double> s(v);
        for (auto& e : s) e *= a;
        return m.predict(s);
    };
    const double slope = at(1.0) - at(0.0);
    for (double a : {-3.0, 0.5, 2.0, 10.0}) CHECK(at(a) == doctest::Approx(at(0.0) + a * slope).epsilon(1e-10));
}

TEST_CASE("JSON round trip preserves predictions exactly") {
    const Rows x = random_rows(30, 4, 8);
    std::vector<double> y;
    for (const auto& r : x) y.push_back(std::exp(0.3 * r[0]) - r[3]);
    const Rows q = random_rows(20, 4, 80);
    for (auto kind : kAllKinds) {
        const auto m = fit(kind, x, y, 5);
        const auto back = RegressionModel::from_json(nlohmann::json::parse(m.to_json().dump()));
        CHECK(back.kind() == kind);
        CHECK(back.feature_arity() == 4);
        CHECK(predict_all(back, q) == predict_all(m, q));
        CHECK(back.training_residual_range() == m.training_residual_range());
    }
    CHECK_THROWS_AS(RegressionModel::from_json(nlohmann::json{{"kind", "linear"}}), ParseError);
}

TEST_CASE("training residual range brackets the residuals") {
    const Rows x = random_rows(30, 2, 9);
    Rng rng(90);
    std::vector<double> y;
    for (const auto& r : x) y.push_back(r[0] + rng.normal());
    const auto m = fit(RegressionKind::Linear, x, y, 0);
    const auto [lo, hi] = m.training_residual_range();
    CHECK(lo <= 0.0);
    CHECK(hi >= 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - m.predict(x[i]);
        CHECK(r >= lo - 1e-12);
        CHECK(r <= hi + 1e-12);
    }
}

TEST_CASE("R2 properties") {
    const std::vector<double> y{1.0, 2.0, 4.0, 8.0};
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 4.0;
    CHECK(r2_score(y, std::vector<double>(4, mean)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r2_score(y, y) == 1.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        std::vector<double> t(10), p(10);
        for (std::size_t i = 0; i < 10; ++i) {
            t[i] = rng.normal();
            p[i] = rng.normal();
        }
        CHECK(r2_score(t, p) <= 1.0);
    }
}

TEST_CASE("cross-validation") {
    const Rows x = random_rows(50, 4, 10);

    SUBCASE("exact linear targets") {
        std::vector<double> y;
        for (const auto& r : x) y.push_back(1.0 + r[0] - 3.0 * r[2]);
        const auto report = cross_validate(RegressionKind::Linear, x, y, 5, 1);
        CHECK(report.fold_r2.size() == 5);
        CHECK(report.mean_r2 >= 0.999);
        const double mean = std::accumulate(report.fold_r2.begin(), report.fold_r2.end(), 0.0) / 5.0;
        CHECK(report.mean_r2 == doctest::Approx(mean).epsilon(1e-15));
    }
    SUBCASE("pure noise averages near zero") {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(derive_seed(seed, "noise"));
            std::vector<double> y(x.size());
            for (auto& v : y) v = rng.normal();
            total += cross_validate(RegressionKind::Linear, x, y, 5, seed).mean_r2;
        }
        CHECK(total / 20.0 <= 0.2);
    }
    SUBCASE("deterministic fold assignment") {
        std::vector<double> y;
        for (const auto& r : x) y.push_back(r[1]);
        CHECK(fold_assignment(50, 5, 3) == fold_assignment(50, 5, 3));
        CHECK(fold_assignment(50, 5, 3) != fold_assignment(50, 5, 4));
        const auto a = cross_validate(RegressionKind::RandomForest, x, y, 5, 3);
        const auto b = cross_validate(RegressionKind::RandomForest, x, y, 5, 3);
        CHECK(a.fold_r2 == b.fold_r2);
        auto folds = fold_assignment(50, 5, 3);
        for (std::size_t f = 0; f < 5; ++f) CHECK(std::count(folds.begin(), folds.end(), f) == 10);
    }
    SUBCASE("too few samples") {
        const Rows few = random_rows(4, 2, 1);
        CHECK_THROWS_AS(cross_validate(RegressionKind::Linear, few, {1, 2, 3, 4}, 5, 0), ValidationError);
    }
}

TEST_CASE("fit preconditions") {
    CHECK_THROWS_AS(fit(RegressionKind::Linear, random_rows(4, 2, 1), {1, 2, 3, 4}, 0), ValidationError);
    Rows ragged = random_rows(6, 2, 1);
    ragged[3].push_back(1.0);
    CHECK_THROWS_AS(fit(RegressionKind::Linear, ragged, {1, 2, 3, 4, 5, 6}, 0), ValidationError);
    CHECK_THROWS_AS(fit(RegressionKind::Linear, random_rows(6, 2, 1), {1, 2, 3}, 0), ValidationError);
    CHECK_THROWS_AS(parse_regression_kind("gb"), LookupError);
    CHECK(parse_regression_kind("rf") == RegressionKind::RandomForest);
}

TEST_CASE("rank-deficient designs fall back to ridge") {
    Rows x = random_rows(10, 3, 2);
    for (auto& r : x) r[2] = 2.0 * r[0];
    std::vector<double> y;
    for (const auto& r : x) y.push_back(r[0] + r[1]);
    const auto m = fit(RegressionKind::Linear, x, y, 0);
    CHECK(r2_score(y, predict_all(m, x)) >= 1.0 - 1e-6);
}
