#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dradapt/complexity.hpp"
#include "dradapt/data.hpp"
#include "dradapt/drtech.hpp"
#include "dradapt/optimize.hpp"
#include "dradapt/quality.hpp"
#include "dradapt/regress.hpp"

namespace dradapt {

inline constexpr const char* kReportSchema = "dradapt/1";

/// Settings shared by every workflow entry point.
struct WorkflowConfig {
    QualityMetric metric = QualityMetric::Tnc;
    std::size_t quality_k = kDefaultQualityK;
    std::size_t budget = 50;
    std::uint64_t seed = 0;
    std::size_t max_n = 3000;
    BayesOptions bayes;
};

/// Seed of a technique's optimization run. Independent of the dataset so the
/// adaptive and conventional workflows replay identical proposal sequences.
std::uint64_t technique_seed(std::uint64_t seed, const std::string& technique);

struct TechniqueRun {
    std::string technique;
    std::optional<double> predicted;  // adaptive runs only
    std::optional<double> threshold;
    std::optional<OptimizationTrace> trace;
    std::optional<std::string> error;  // set when every trial failed
};

struct WorkflowResult {
    std::string mode;  // "conventional" or "adaptive-top-<m>"
    std::string dataset;
    QualityMetric metric = QualityMetric::Tnc;
    std::vector<std::string> chosen;
    std::vector<TechniqueRun> runs;
    std::string best_technique;
    HyperparamAssignment best_assignment;
    RowMatrix projection;
    double final_score = 0.0;

    std::size_t total_trials() const;
    std::size_t evaluations() const;
    double wall_time() const;
    /// Max over the runs' best scores.
    double recomputed_score() const;
};

nlohmann::json to_json(const WorkflowResult& r, bool timing = false);

/// Optimizes one technique on one dataset under the configured metric.
/// Returns the trace and the best projection found.
struct TechniqueOutcome {
    OptimizationTrace trace;
    RowMatrix projection;
};
TechniqueOutcome optimize_technique(const TechniqueDescriptor& t, const Dataset& ds, const QualityEvaluator& evaluator,
                                    const WorkflowConfig& config, const StopCriterion& stop = {});

/// Full-budget optimization of every technique, no early stop.
WorkflowResult conventional_optimize(const Dataset& ds, const std::vector<TechniqueDescriptor>& techniques,
                                     const WorkflowConfig& config);

// ---------------------------------------------------------------------------
// Pretraining

struct TrainingRow {
    std::string dataset;
    std::vector<double> features;
    std::map<std::string, double> best;  // technique -> maximum achieved score
};

struct StoreManifest {
    std::string corpus_hash;
    std::vector<std::size_t> feature_ks = kDefaultMncKs;
    QualityMetric metric = QualityMetric::Tnc;
    std::size_t quality_k = kDefaultQualityK;
    std::size_t budget = 50;
    std::uint64_t seed = 0;
    RegressionKind regressor = RegressionKind::RandomForest;
    std::vector<TrainingRow> training;
};

/// Per-technique regressors mapping complexity features to the predicted
/// maximum achievable score under one metric.
struct ModelStore {
    StoreManifest manifest;
    std::map<std::string, std::map<std::string, RegressionModel>> models;  // technique -> metric -> model

    std::size_t feature_arity() const noexcept { return 1 + manifest.feature_ks.size(); }
    std::vector<std::string> techniques() const;
    const RegressionModel& model(const std::string& technique) const;

    nlohmann::json to_json() const;
    static ModelStore from_json(const nlohmann::json& j);
};

/// Features and per-technique best scores for each dataset. Datasets whose
/// features cannot be computed are reported on `log` and skipped; a technique
/// whose every trial failed is left out of that row.
/// The conventional results are returned through `conventional` when given.
std::vector<TrainingRow> compute_ground_truth(const std::vector<Dataset>& corpus,
                                              const std::vector<TechniqueDescriptor>& techniques,
                                              const WorkflowConfig& config, const std::vector<std::size_t>& ks,
                                              std::ostream* log = nullptr,
                                              std::vector<WorkflowResult>* conventional = nullptr);

/// Fits one model per technique. Throws PretrainError when fewer than five
/// rows carry a target for some technique.
ModelStore fit_store(const std::vector<TrainingRow>& rows, const StoreManifest& manifest);

/// compute_ground_truth followed by fit_store. Requires at least 10 datasets.
ModelStore pretrain(const std::vector<Dataset>& corpus, const std::vector<TechniqueDescriptor>& techniques,
                    const WorkflowConfig& config, RegressionKind kind = RegressionKind::RandomForest,
                    const std::vector<std::size_t>& ks = kDefaultMncKs, std::ostream* log = nullptr);

/// FNV-1a over the datasets' content hashes, as hex.
std::string corpus_hash(const std::vector<Dataset>& corpus);

/// One prediction per stored technique, clamped to the metric's range.
std::map<std::string, double> predict_max_accuracy(const ModelStore& store, const std::vector<double>& features);

/// Techniques ordered by descending prediction, ties by id.
std::vector<std::pair<std::string, double>> rank_techniques(const std::map<std::string, double>& predictions);

struct AdaptiveOptions {
    std::size_t top_m = 1;
    double threshold_fraction = 1.0;
};

/// Ranks techniques by predicted maximum and optimizes the top m, each
/// stopping once it reaches threshold_fraction times its prediction.
WorkflowResult adaptive_optimize(const Dataset& ds, const ModelStore& store, const TechniqueRegistry& registry,
                                 const WorkflowConfig& config, const AdaptiveOptions& options = {});

/// Same, reusing precomputed features of ds (PDS then MNC at the store's ks).
WorkflowResult adaptive_optimize(const Dataset& ds, const std::vector<double>& features, const ModelStore& store,
                                 const TechniqueRegistry& registry, const WorkflowConfig& config,
                                 const AdaptiveOptions& options = {});

struct CompareReport {
    std::string dataset;
    QualityMetric metric;
    double accuracy_delta;      // adaptive - conventional
    double trial_count_ratio;   // adaptive / conventional
    double evaluation_ratio;    // objective calls, adaptive / conventional
    double wall_time_ratio;
};

/// Throws ValidationError on metric or dataset mismatch.
CompareReport compare(const WorkflowResult& adaptive, const WorkflowResult& conventional);
nlohmann::json to_json(const CompareReport& r, const WorkflowResult& adaptive, const WorkflowResult& conventional,
                       bool timing = false);

// ---------------------------------------------------------------------------
// Benchmark harness

struct BenchmarkOptions {
    WorkflowConfig workflow;
    RegressionKind regressor = RegressionKind::RandomForest;
    std::vector<std::size_t> ks = kDefaultMncKs;
    std::size_t split_seeds = 5;
    double test_fraction = 0.2;
    std::vector<std::size_t> top_m = {1, 3};
    double threshold_fraction = 1.0;
};

struct RegressionScore {
    std::string technique;
    double r2;
    double mae;
};

struct BenchmarkCase {
    std::size_t split;
    std::string dataset;
    std::size_t top_m;
    std::vector<std::string> chosen;
    double adaptive_score;
    double conventional_score;
    std::size_t adaptive_evaluations;
    std::size_t conventional_evaluations;
    std::size_t adaptive_trials;
    std::size_t conventional_trials;
    double adaptive_wall_time;
    double conventional_wall_time;
    double ranking_spearman;  // predicted vs true technique scores; NaN if undefined
};

struct BenchmarkSplit {
    std::uint64_t seed;
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::vector<RegressionScore> regression;
};

struct BenchmarkReport {
    std::vector<TrainingRow> ground_truth;
    std::vector<BenchmarkSplit> splits;
    std::vector<BenchmarkCase> cases;

    double mean_r2() const;
    double mean_mae() const;
    /// Mean of conventional - adaptive final score over cases with this top_m.
    double mean_accuracy_loss(std::size_t top_m) const;
};

/// Ground truth is computed once by full conventional runs; each split seed
/// trains on the training share and replays the adaptive workflow on the
/// test share against those conventional results.
BenchmarkReport run_benchmark(const std::vector<Dataset>& corpus, const TechniqueRegistry& registry,
                              const BenchmarkOptions& options, std::ostream* log = nullptr);

nlohmann::json to_json(const BenchmarkReport& r, const BenchmarkOptions& options, bool timing = false);
std::string benchmark_csv(const BenchmarkReport& r, bool timing = false);

/// Mixed synthetic corpus: kinds cycle through all generators, ambient
/// dimension roughly log-uniform in [2, 512], N in [n_min, n_max].
std::vector<SyntheticSpec> synthetic_corpus(std::size_t count, std::uint64_t seed, std::size_t n_min = 100,
                                            std::size_t n_max = 150);

}  // namespace dradapt
