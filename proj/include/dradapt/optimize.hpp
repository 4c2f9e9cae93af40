#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dradapt/hyperparams.hpp"

namespace dradapt {

/// Scores one assignment; higher is better. The seed is the projection seed
/// chosen by the optimizer. Throwing a dradapt::Error marks the trial failed.
using Objective = std::function<double(const HyperparamAssignment&, std::uint64_t seed)>;

struct Trial {
    HyperparamAssignment assignment;
    double score = 0.0;  // -inf when the objective failed
    std::uint64_t seed = 0;
    double wall_time = 0.0;  // seconds spent in the objective
    bool cached = false;     // duplicate proposal answered from the cache
    std::optional<std::string> error;
};

enum class StopReason { BudgetExhausted, EarlyThreshold, ObjectiveError };
std::string to_string(StopReason r);
StopReason parse_stop_reason(const std::string& s);

struct OptimizationTrace {
    std::vector<Trial> trials;
    std::size_t best = 0;
    StopReason stop_reason = StopReason::BudgetExhausted;
    /// Bayesian steps that fell back to a random proposal.
    std::size_t gp_fallbacks = 0;

    double best_score() const { return trials.at(best).score; }
    /// Running maximum of the scores, one entry per trial.
    std::vector<double> best_so_far() const;
    /// Trials that actually ran the objective.
    std::size_t evaluations() const;
    double wall_time() const;
};

struct StopCriterion {
    enum class Kind { None, Threshold };
    Kind kind = Kind::None;
    std::optional<double> threshold;

    bool satisfied(double best_score) const;
};

/// Threshold stop at exactly predicted_max. Throws ValidationError if not finite.
StopCriterion make_threshold_stop(double predicted_max);

struct BayesOptions {
    std::size_t n_init = 10;
    std::size_t candidates = 256;
    double xi = 0.01;
    double noise = 1e-6;
};

/// Independent uniform draws from the unit cube of the space.
OptimizationTrace random_search(const Objective& objective, const HyperparamSpace& space, std::size_t budget,
                                std::uint64_t seed, const StopCriterion& stop = {});

/// n_init random trials, then GP-guided proposals maximizing expected
/// improvement over random candidates. An empty space yields one trial.
OptimizationTrace bayes_optimize(const Objective& objective, const HyperparamSpace& space, std::size_t budget,
                                 std::uint64_t seed, const StopCriterion& stop = {},
                                 const BayesOptions& options = {});

/// One JSON object per trial followed by a footer {best, best_score, stop_reason}.
/// Wall times are included only when timing is set.
std::string trace_to_jsonl(const OptimizationTrace& trace, bool timing = false);
nlohmann::json to_json(const OptimizationTrace& trace, bool timing = false);

// ---------------------------------------------------------------------------
// Surrogate model

/// Matérn-5/2 kernel with unit amplitude.
double matern52(double distance, double length_scale);

/// Zero-mean GP regression on standardized targets. The length scale is
/// chosen from a fixed grid by marginal likelihood.
class GaussianProcess {
public:
    /// Throws DegenerateInput when the kernel matrix cannot be factorized.
    GaussianProcess(std::vector<std::vector<double>> x, const std::vector<double>& y, double noise = 1e-6);

    /// Posterior mean and standard deviation in the original target units.
    std::pair<double, double> predict(const std::vector<double>& x) const;
    double length_scale() const noexcept { return length_scale_; }

private:
    std::vector<std::vector<double>> x_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    double length_scale_ = 1.0;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
};

/// Expected improvement of a Gaussian posterior over `best`, for maximization.
double expected_improvement(double mean, double sd, double best, double xi);

}  // namespace dradapt
