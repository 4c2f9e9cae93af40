#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "dradapt/error.hpp"
#include "dradapt/workflow.hpp"

namespace dradapt {

namespace {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Spearman correlation of two short score lists; NaN when undefined.
double ranking_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    try {
        return pearson(average_ranks(a), average_ranks(b));
    } catch (const DegenerateInput&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

double BenchmarkReport::mean_r2() const {
    std::vector<double> v;
    for (const auto& s : splits)
        for (const auto& r : s.regression) v.push_back(r.r2);
    return mean_of(v);
}

double BenchmarkReport::mean_mae() const {
    std::vector<double> v;
    for (const auto& s : splits)
        for (const auto& r : s.regression) v.push_back(r.mae);
    return mean_of(v);
}

double BenchmarkReport::mean_accuracy_loss(std::size_t top_m) const {
    std::vector<double> v;
    for (const auto& c : cases)
        if (c.top_m == top_m) v.push_back(c.conventional_score - c.adaptive_score);
    return mean_of(v);
}

BenchmarkReport run_benchmark(const std::vector<Dataset>& corpus, const TechniqueRegistry& registry,
                              const BenchmarkOptions& options, std::ostream* log) {
    std::set<std::string> names;
    for (const auto& ds : corpus)
        if (!names.insert(ds.name()).second) throw ValidationError("duplicate dataset name '" + ds.name() + "'");
    if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
        throw ValidationError("test fraction must lie in (0, 1)");
    }
    if (options.split_seeds < 1) throw ValidationError("benchmark needs at least one split seed");

    const auto& config = options.workflow;
    BenchmarkReport report;
    std::vector<WorkflowResult> conventional;
    report.ground_truth =
        compute_ground_truth(corpus, registry.list(), config, options.ks, log, &conventional);
    const std::size_t n = report.ground_truth.size();
    const auto n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(options.test_fraction * static_cast<double>(n))));
    if (n < n_test + 5) {
        throw PretrainError("only " + std::to_string(n) + " datasets survived; too few for a train/test split");
    }

    std::map<std::string, const Dataset*> by_name;
    for (const auto& ds : corpus) by_name[ds.name()] = &ds;

    StoreManifest manifest;
    manifest.corpus_hash = corpus_hash(corpus);
    manifest.feature_ks = options.ks;
    manifest.metric = config.metric;
    manifest.quality_k = config.quality_k;
    manifest.budget = config.budget;
    manifest.seed = config.seed;
    manifest.regressor = options.regressor;

    const std::uint64_t split_root = derive_seed(config.seed, "split");
    for (std::size_t s = 0; s < options.split_seeds; ++s) {
        BenchmarkSplit split;
        split.seed = derive_seed(split_root, s);
        Rng rng(split.seed);
        const auto perm = rng.permutation(n);
        std::vector<std::size_t> test_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
        std::vector<std::size_t> train_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
        std::sort(test_idx.begin(), test_idx.end());
        std::sort(train_idx.begin(), train_idx.end());

        std::vector<TrainingRow> train_rows;
        for (auto i : train_idx) {
            train_rows.push_back(report.ground_truth[i]);
            split.train.push_back(report.ground_truth[i].dataset);
        }
        for (auto i : test_idx) split.test.push_back(report.ground_truth[i].dataset);
        const ModelStore store = fit_store(train_rows, manifest);

        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> held_out;  // truth, prediction
        for (auto i : test_idx) {
            const auto& row = report.ground_truth[i];
            const auto predictions = predict_max_accuracy(store, row.features);
            std::vector<double> pred_list, true_list;
            for (const auto& [technique, truth] : row.best) {
                const auto p = predictions.find(technique);
                if (p == predictions.end()) continue;
                held_out[technique].first.push_back(truth);
                held_out[technique].second.push_back(p->second);
                pred_list.push_back(p->second);
                true_list.push_back(truth);
            }
            const double rank_rho = ranking_correlation(pred_list, true_list);

            const Dataset& ds = *by_name.at(row.dataset);
            for (auto m : options.top_m) {
                if (m < 1 || m > store.models.size()) continue;
                const auto adaptive = adaptive_optimize(ds, row.features, store, registry, config,
                                                        {m, options.threshold_fraction});
                const auto& conv = conventional[i];
                report.cases.push_back({s, row.dataset, m, adaptive.chosen, adaptive.final_score, conv.final_score,
                                        adaptive.evaluations(), conv.evaluations(), adaptive.total_trials(),
                                        conv.total_trials(), adaptive.wall_time(), conv.wall_time(), rank_rho});
                if (log) {
                    *log << "split " << s << " " << row.dataset << " top-" << m << ": adaptive "
                         << adaptive.final_score << " vs conventional " << conv.final_score << '\n';
                }
            }
        }
        for (const auto& [technique, tp] : held_out) {
            double abs_err = 0.0;
            for (std::size_t i = 0; i < tp.first.size(); ++i) abs_err += std::abs(tp.first[i] - tp.second[i]);
            split.regression.push_back(
                {technique, r2_score(tp.first, tp.second), abs_err / static_cast<double>(tp.first.size())});
        }
        report.splits.push_back(std::move(split));
    }
    return report;
}

nlohmann::json to_json(const BenchmarkReport& r, const BenchmarkOptions& options, bool timing) {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["metric"] = to_string(options.workflow.metric);
    j["quality_k"] = options.workflow.quality_k;
    j["budget"] = options.workflow.budget;
    j["seed"] = options.workflow.seed;
    j["regressor"] = to_string(options.regressor);
    j["feature_ks"] = options.ks;
    j["threshold_fraction"] = options.threshold_fraction;

    auto gt = nlohmann::json::array();
    for (const auto& row : r.ground_truth)
        gt.push_back({{"dataset", row.dataset}, {"features", row.features}, {"best", row.best}});
    j["ground_truth"] = std::move(gt);

    auto splits = nlohmann::json::array();
    for (const auto& s : r.splits) {
        auto reg = nlohmann::json::array();
        for (const auto& rs : s.regression)
            reg.push_back({{"technique", rs.technique}, {"r2", rs.r2}, {"mae", rs.mae}});
        splits.push_back({{"seed", s.seed}, {"train", s.train}, {"test", s.test}, {"regression", std::move(reg)}});
    }
    j["splits"] = std::move(splits);

    auto cases = nlohmann::json::array();
    for (const auto& c : r.cases) {
        nlohmann::json cj = {{"split", c.split},
                             {"dataset", c.dataset},
                             {"top_m", c.top_m},
                             {"chosen", c.chosen},
                             {"adaptive_score", c.adaptive_score},
                             {"conventional_score", c.conventional_score},
                             {"accuracy_delta", c.adaptive_score - c.conventional_score},
                             {"adaptive_evaluations", c.adaptive_evaluations},
                             {"conventional_evaluations", c.conventional_evaluations},
                             {"adaptive_trials", c.adaptive_trials},
                             {"conventional_trials", c.conventional_trials},
                             {"ranking_spearman", number_or_null(c.ranking_spearman)}};
        if (timing) {
            cj["adaptive_wall_time"] = c.adaptive_wall_time;
            cj["conventional_wall_time"] = c.conventional_wall_time;
        }
        cases.push_back(std::move(cj));
    }
    j["cases"] = std::move(cases);

    nlohmann::json summary;
    summary["mean_r2"] = number_or_null(r.mean_r2());
    summary["mean_mae"] = number_or_null(r.mean_mae());
    std::set<std::size_t> ms;
    for (const auto& c : r.cases) ms.insert(c.top_m);
    for (auto m : ms) {
        std::vector<double> evals, rhos, walls;
        for (const auto& c : r.cases) {
            if (c.top_m != m) continue;
            evals.push_back(static_cast<double>(c.adaptive_evaluations) / static_cast<double>(c.conventional_evaluations));
            if (std::isfinite(c.ranking_spearman)) rhos.push_back(c.ranking_spearman);
            if (c.conventional_wall_time > 0.0) walls.push_back(c.adaptive_wall_time / c.conventional_wall_time);
        }
        nlohmann::json sm = {{"mean_accuracy_loss", number_or_null(r.mean_accuracy_loss(m))},
                             {"mean_evaluation_ratio", number_or_null(mean_of(evals))},
                             {"mean_ranking_spearman", number_or_null(mean_of(rhos))}};
        if (timing) sm["mean_wall_time_ratio"] = number_or_null(mean_of(walls));
        summary["top_" + std::to_string(m)] = std::move(sm);
    }
    j["summary"] = std::move(summary);
    return j;
}

std::string benchmark_csv(const BenchmarkReport& r, bool timing) {
    std::ostringstream out;
    out.precision(17);
    out << "split,dataset,top_m,chosen,adaptive_score,conventional_score,accuracy_delta,adaptive_evaluations,"
           "conventional_evaluations,ranking_spearman";
    if (timing) out << ",adaptive_wall_time,conventional_wall_time";
    out << '\n';
    for (const auto& c : r.cases) {
        std::string chosen;
        for (const auto& t : c.chosen) chosen += (chosen.empty() ? "" : ";") + t;
        out << c.split << ',' << c.dataset << ',' << c.top_m << ',' << chosen << ',' << c.adaptive_score << ','
            << c.conventional_score << ',' << (c.adaptive_score - c.conventional_score) << ','
            << c.adaptive_evaluations << ',' << c.conventional_evaluations << ',';
        if (std::isfinite(c.ranking_spearman)) out << c.ranking_spearman;
        if (timing) out << ',' << c.adaptive_wall_time << ',' << c.conventional_wall_time;
        out << '\n';
    }
    return out.str();
}

std::vector<SyntheticSpec> synthetic_corpus(std::size_t count, std::uint64_t seed, std::size_t n_min,
                                            std::size_t n_max) {
    if (n_min < 3 || n_max < n_min) throw ValidationError("invalid corpus size range");
    static constexpr SyntheticKind kinds[] = {SyntheticKind::IidGaussian, SyntheticKind::GaussianMixture,
                                              SyntheticKind::SwissRoll, SyntheticKind::HyperplaneEmbedded,
                                              SyntheticKind::IidUniform};
    Rng rng(derive_seed(seed, "corpus"));
    std::vector<SyntheticSpec> specs;
    for (std::size_t i = 0; i < count; ++i) {
        SyntheticSpec spec;
        spec.kind = kinds[i % std::size(kinds)];
        spec.n = n_min + rng.below(n_max - n_min + 1);
        spec.d = static_cast<std::size_t>(std::lround(std::exp(rng.uniform(std::log(2.0), std::log(512.0)))));
        spec.seed = derive_seed(seed, i);
        switch (spec.kind) {
            case SyntheticKind::GaussianMixture:
                spec.params["components"] = static_cast<double>(2 + rng.below(5));
                spec.params["separation"] = std::exp(rng.uniform(0.0, std::log(30.0)));
                spec.params["imbalance"] = std::exp(rng.uniform(0.0, std::log(30.0)));
                break;
            case SyntheticKind::SwissRoll:
                spec.d = std::max<std::size_t>(spec.d, 3);
                spec.params["noise"] = rng.uniform(0.0, 1.0);
                break;
            case SyntheticKind::HyperplaneEmbedded: {
                const auto cap = std::min<std::size_t>(spec.d, 10);
                spec.params["intrinsic_dim"] = static_cast<double>(cap <= 2 ? cap : 2 + rng.below(cap - 1));
                spec.params["noise"] = rng.uniform(0.0, 0.1);
                break;
            }
            default: break;
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

}  // namespace dradapt
