#include "dradapt/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dradapt/error.hpp"
#include "dradapt/parallel.hpp"

namespace dradapt {

std::uint64_t technique_seed(std::uint64_t seed, const std::string& technique) {
    return derive_seed(seed, "technique:" + technique);
}

namespace {

Dataset prepare(const Dataset& ds, const WorkflowConfig& config) {
    return subsample(ds, config.max_n, derive_seed(config.seed, "subsample"));
}

void finalize(WorkflowResult& result, const std::vector<RowMatrix>& projections) {
    bool any = false;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto& run = result.runs[i];
        if (!run.trace) continue;
        const double score = run.trace->best_score();
        if (!any || score > result.final_score) {
            any = true;
            result.final_score = score;
            result.best_technique = run.technique;
            result.best_assignment = run.trace->trials[run.trace->best].assignment;
            result.projection = projections[i];
        }
    }
    if (!any) {
        std::string detail;
        for (const auto& run : result.runs) detail += "\n  " + run.technique + ": " + run.error.value_or("?");
        throw WorkflowError("every technique failed on '" + result.dataset + "':" + detail);
    }
}

// Runs each (technique, stop) pair, in parallel across techniques.
WorkflowResult run_techniques(const Dataset& ds, const std::vector<const TechniqueDescriptor*>& techniques,
                              const std::vector<StopCriterion>& stops, const WorkflowConfig& config,
                              WorkflowResult result) {
    const QualityEvaluator evaluator(pairwise_distances(ds), config.metric, config.quality_k);
    std::vector<RowMatrix> projections(techniques.size());
    std::vector<TechniqueRun> runs(techniques.size());
    parallel_for(techniques.size(), [&](std::size_t i) {
        runs[i].technique = techniques[i]->id;
        try {
            auto outcome = optimize_technique(*techniques[i], ds, evaluator, config, stops[i]);
            runs[i].trace = std::move(outcome.trace);
            projections[i] = std::move(outcome.projection);
        } catch (const Error& e) {
            runs[i].error = e.what();
        }
    });
    for (std::size_t i = 0; i < runs.size(); ++i) {
        runs[i].predicted = result.runs.size() > i ? result.runs[i].predicted : std::nullopt;
        runs[i].threshold = stops[i].threshold;
    }
    result.runs = std::move(runs);
    finalize(result, projections);
    return result;
}

}  // namespace

std::size_t WorkflowResult::total_trials() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.trace ? r.trace->trials.size() : 0;
    return n;
}

std::size_t WorkflowResult::evaluations() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.trace ? r.trace->evaluations() : 0;
    return n;
}

double WorkflowResult::wall_time() const {
    double t = 0.0;
    for (const auto& r : runs) t += r.trace ? r.trace->wall_time() : 0.0;
    return t;
}

double WorkflowResult::recomputed_score() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : runs)
        if (r.trace) best = std::max(best, r.trace->best_score());
    return best;
}

nlohmann::json to_json(const WorkflowResult& r, bool timing) {
    nlohmann::json j;
    j["mode"] = r.mode;
    j["dataset"] = r.dataset;
    j["metric"] = to_string(r.metric);
    j["chosen"] = r.chosen;
    j["best_technique"] = r.best_technique;
    j["best_assignment"] = to_json(r.best_assignment);
    j["final_score"] = r.final_score;
    j["total_trials"] = r.total_trials();
    j["evaluations"] = r.evaluations();
    if (timing) j["wall_time"] = r.wall_time();
    auto runs = nlohmann::json::array();
    for (const auto& run : r.runs) {
        nlohmann::json rj;
        rj["technique"] = run.technique;
        if (run.predicted) rj["predicted"] = *run.predicted;
        if (run.threshold) rj["threshold"] = *run.threshold;
        if (run.trace) rj["trace"] = to_json(*run.trace, timing);
        if (run.error) rj["error"] = *run.error;
        runs.push_back(std::move(rj));
    }
    j["runs"] = std::move(runs);
    return j;
}

TechniqueOutcome optimize_technique(const TechniqueDescriptor& t, const Dataset& ds, const QualityEvaluator& evaluator,
                                    const WorkflowConfig& config, const StopCriterion& stop) {
    const HyperparamSpace space = t.space_for(ds.size());
    double best = -std::numeric_limits<double>::infinity();
    RowMatrix best_projection;
    const Objective objective = [&](const HyperparamAssignment& h, std::uint64_t seed) {
        const Projection p = project(t, ds, h, seed);
        const double score = evaluator.score(p.points()).value;
        if (score > best) {
            best = score;
            best_projection = p.points();
        }
        return score;
    };
    auto trace = bayes_optimize(objective, space, config.budget, technique_seed(config.seed, t.id), stop, config.bayes);
    return {std::move(trace), std::move(best_projection)};
}

WorkflowResult conventional_optimize(const Dataset& input, const std::vector<TechniqueDescriptor>& techniques,
                                     const WorkflowConfig& config) {
    if (techniques.empty()) throw ValidationError("conventional workflow needs at least one technique");
    const Dataset ds = prepare(input, config);
    WorkflowResult result;
    result.mode = "conventional";
    result.dataset = ds.name();
    result.metric = config.metric;
    std::vector<const TechniqueDescriptor*> chosen;
    for (const auto& t : techniques) {
        chosen.push_back(&t);
        result.chosen.push_back(t.id);
    }
    return run_techniques(ds, chosen, std::vector<StopCriterion>(chosen.size()), config, std::move(result));
}

// ---------------------------------------------------------------------------

std::vector<std::string> ModelStore::techniques() const {
    std::vector<std::string> out;
    for (const auto& [id, per_metric] : models) out.push_back(id);
    return out;
}

const RegressionModel& ModelStore::model(const std::string& technique) const {
    const auto it = models.find(technique);
    if (it == models.end()) throw LookupError("model store has no technique '" + technique + "'");
    const auto m = it->second.find(to_string(manifest.metric));
    if (m == it->second.end()) {
        throw LookupError("model store has no " + to_string(manifest.metric) + " model for '" + technique + "'");
    }
    return m->second;
}

nlohmann::json ModelStore::to_json() const {
    nlohmann::json training = nlohmann::json::array();
    for (const auto& row : manifest.training) {
        training.push_back({{"dataset", row.dataset}, {"features", row.features}, {"best", row.best}});
    }
    FeatureVector tags;
    tags.entries.push_back({ComplexityMetric::Pds, 0.0, std::nullopt});
    for (auto k : manifest.feature_ks) tags.entries.push_back({ComplexityMetric::Mnc, 0.0, k});

    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["version"] = 1;
    j["manifest"] = {{"corpus_hash", manifest.corpus_hash},
                     {"feature_ks", manifest.feature_ks},
                     {"feature_tags", tags.tags()},
                     {"metric", to_string(manifest.metric)},
                     {"quality_k", manifest.quality_k},
                     {"budget", manifest.budget},
                     {"seed", manifest.seed},
                     {"regressor", to_string(manifest.regressor)},
                     {"training", std::move(training)}};
    nlohmann::json mj = nlohmann::json::object();
    for (const auto& [technique, per_metric] : models)
        for (const auto& [metric, model] : per_metric) mj[technique][metric] = model.to_json();
    j["models"] = std::move(mj);
    return j;
}

ModelStore ModelStore::from_json(const nlohmann::json& j) {
    ModelStore store;
    try {
        if (j.at("version").get<int>() != 1) throw ParseError("unsupported model store version");
        const auto& m = j.at("manifest");
        store.manifest.corpus_hash = m.at("corpus_hash").get<std::string>();
        store.manifest.feature_ks = m.at("feature_ks").get<std::vector<std::size_t>>();
        store.manifest.metric = parse_quality_metric(m.at("metric").get<std::string>());
        store.manifest.quality_k = m.at("quality_k").get<std::size_t>();
        store.manifest.budget = m.at("budget").get<std::size_t>();
        store.manifest.seed = m.at("seed").get<std::uint64_t>();
        store.manifest.regressor = parse_regression_kind(m.at("regressor").get<std::string>());
        for (const auto& row : m.at("training")) {
            store.manifest.training.push_back({row.at("dataset").get<std::string>(),
                                               row.at("features").get<std::vector<double>>(),
                                               row.at("best").get<std::map<std::string, double>>()});
        }
        for (const auto& [technique, per_metric] : j.at("models").items())
            for (const auto& [metric, model] : per_metric.items())
                store.models[technique].emplace(metric, RegressionModel::from_json(model));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model store: ") + e.what());
    }
    for (const auto& [technique, per_metric] : store.models)
        for (const auto& [metric, model] : per_metric)
            if (model.feature_arity() != store.feature_arity())
                throw ParseError("model for '" + technique + "' has arity inconsistent with the manifest");
    return store;
}

std::string corpus_hash(const std::vector<Dataset>& corpus) {
    std::uint64_t h = fnv1a(nullptr, 0);
    for (const auto& ds : corpus) {
        const std::uint64_t c = ds.content_hash();
        h = fnv1a(&c, sizeof c, h);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<TrainingRow> compute_ground_truth(const std::vector<Dataset>& corpus,
                                              const std::vector<TechniqueDescriptor>& techniques,
                                              const WorkflowConfig& config, const std::vector<std::size_t>& ks,
                                              std::ostream* log, std::vector<WorkflowResult>* conventional) {
    std::vector<TrainingRow> rows;
    for (const auto& input : corpus) {
        const Dataset ds = prepare(input, config);
        TrainingRow row;
        row.dataset = ds.name();
        try {
            row.features = complexity_features(ds, ks).values();
            WorkflowResult result = conventional_optimize(ds, techniques, config);
            for (const auto& run : result.runs) {
                if (run.trace) {
                    row.best[run.technique] = run.trace->best_score();
                } else if (log) {
                    *log << "warning: " << run.technique << " failed on '" << row.dataset << "': " << *run.error
                         << '\n';
                }
            }
            if (log) *log << "ground truth: " << row.dataset << " done\n";
            rows.push_back(std::move(row));
            if (conventional) conventional->push_back(std::move(result));
        } catch (const Error& e) {
            if (log) *log << "warning: skipping '" << row.dataset << "': " << e.what() << '\n';
        }
    }
    return rows;
}

ModelStore fit_store(const std::vector<TrainingRow>& rows, const StoreManifest& manifest) {
    ModelStore store;
    store.manifest = manifest;
    store.manifest.training = rows;
    std::map<std::string, std::pair<std::vector<std::vector<double>>, std::vector<double>>> data;
    for (const auto& row : rows) {
        if (row.features.size() != store.feature_arity()) {
            throw ValidationError("training row '" + row.dataset + "' has the wrong feature arity");
        }
        for (const auto& [technique, score] : row.best) {
            data[technique].first.push_back(row.features);
            data[technique].second.push_back(score);
        }
    }
    if (data.empty()) throw PretrainError("no technique produced a usable score on any dataset");
    for (const auto& [technique, xy] : data) {
        if (xy.first.size() < 5) {
            throw PretrainError("only " + std::to_string(xy.first.size()) + " datasets yield a score for '" +
                                technique + "'; at least 5 are needed");
        }
        store.models[technique].emplace(
            to_string(manifest.metric),
            fit(manifest.regressor, xy.first, xy.second, derive_seed(manifest.seed, "regressor:" + technique)));
    }
    return store;
}

ModelStore pretrain(const std::vector<Dataset>& corpus, const std::vector<TechniqueDescriptor>& techniques,
                    const WorkflowConfig& config, RegressionKind kind, const std::vector<std::size_t>& ks,
                    std::ostream* log) {
    if (corpus.size() < 10) {
        throw PretrainError("pretraining needs at least 10 datasets, got " + std::to_string(corpus.size()));
    }
    if (techniques.empty()) throw ValidationError("pretraining needs at least one technique");
    const auto rows = compute_ground_truth(corpus, techniques, config, ks, log);
    if (rows.size() < 5) {
        throw PretrainError("only " + std::to_string(rows.size()) + " datasets survived; at least 5 are needed");
    }
    StoreManifest manifest;
    manifest.corpus_hash = corpus_hash(corpus);
    manifest.feature_ks = ks;
    manifest.metric = config.metric;
    manifest.quality_k = config.quality_k;
    manifest.budget = config.budget;
    manifest.seed = config.seed;
    manifest.regressor = kind;
    return fit_store(rows, manifest);
}

std::map<std::string, double> predict_max_accuracy(const ModelStore& store, const std::vector<double>& features) {
    if (features.size() != store.feature_arity()) {
        throw ValidationError("feature vector has arity " + std::to_string(features.size()) + ", store expects " +
                              std::to_string(store.feature_arity()));
    }
    const auto [lo, hi] = metric_range(store.manifest.metric);
    std::map<std::string, double> out;
    for (const auto& technique : store.techniques())
        out[technique] = std::clamp(store.model(technique).predict(features), lo, hi);
    return out;
}

std::vector<std::pair<std::string, double>> rank_techniques(const std::map<std::string, double>& predictions) {
    std::vector<std::pair<std::string, double>> ranked(predictions.begin(), predictions.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranked;
}

WorkflowResult adaptive_optimize(const Dataset& input, const ModelStore& store, const TechniqueRegistry& registry,
                                 const WorkflowConfig& config, const AdaptiveOptions& options) {
    const Dataset ds = prepare(input, config);
    return adaptive_optimize(ds, complexity_features(ds, store.manifest.feature_ks).values(), store, registry,
                             config, options);
}

WorkflowResult adaptive_optimize(const Dataset& input, const std::vector<double>& features, const ModelStore& store,
                                 const TechniqueRegistry& registry, const WorkflowConfig& config,
                                 const AdaptiveOptions& options) {
    if (store.models.empty()) throw ValidationError("model store is empty");
    if (store.manifest.metric != config.metric) {
        throw ValidationError("model store was trained for " + to_string(store.manifest.metric) + ", not " +
                              to_string(config.metric));
    }
    if (options.top_m < 1 || options.top_m > store.models.size()) {
        throw ValidationError("top_m must lie in [1, " + std::to_string(store.models.size()) + "]");
    }
    if (!std::isfinite(options.threshold_fraction)) throw ValidationError("threshold fraction must be finite");

    const Dataset ds = prepare(input, config);
    const auto ranked = rank_techniques(predict_max_accuracy(store, features));

    WorkflowResult result;
    result.mode = "adaptive-top-" + std::to_string(options.top_m);
    result.dataset = ds.name();
    result.metric = config.metric;
    std::vector<const TechniqueDescriptor*> chosen;
    std::vector<StopCriterion> stops;
    for (std::size_t i = 0; i < options.top_m; ++i) {
        const auto& [id, predicted] = ranked[i];
        chosen.push_back(&registry.find(id));
        result.chosen.push_back(id);
        stops.push_back(make_threshold_stop(options.threshold_fraction * predicted));
        TechniqueRun run;
        run.technique = id;
        run.predicted = predicted;
        result.runs.push_back(std::move(run));
    }
    return run_techniques(ds, chosen, stops, config, std::move(result));
}

CompareReport compare(const WorkflowResult& adaptive, const WorkflowResult& conventional) {
    if (adaptive.metric != conventional.metric) throw ValidationError("cannot compare runs under different metrics");
    if (adaptive.dataset != conventional.dataset) throw ValidationError("cannot compare runs on different datasets");
    const auto ratio = [](double a, double b) { return b > 0.0 ? a / b : (a > 0.0 ? std::numeric_limits<double>::infinity() : 1.0); };
    return {adaptive.dataset,
            adaptive.metric,
            adaptive.final_score - conventional.final_score,
            ratio(static_cast<double>(adaptive.total_trials()), static_cast<double>(conventional.total_trials())),
            ratio(static_cast<double>(adaptive.evaluations()), static_cast<double>(conventional.evaluations())),
            ratio(adaptive.wall_time(), conventional.wall_time())};
}

nlohmann::json to_json(const CompareReport& r, const WorkflowResult& adaptive, const WorkflowResult& conventional,
                       bool timing) {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["dataset"] = r.dataset;
    j["metric"] = to_string(r.metric);
    j["accuracy_delta"] = r.accuracy_delta;
    j["trial_count_ratio"] = r.trial_count_ratio;
    j["evaluation_ratio"] = r.evaluation_ratio;
    if (timing) j["wall_time_ratio"] = r.wall_time_ratio;
    j["adaptive"] = to_json(adaptive, timing);
    j["conventional"] = to_json(conventional, timing);
    return j;
}

}  // namespace dradapt
