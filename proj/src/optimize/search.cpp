#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <new>
#include <sstream>

#include "dradapt/error.hpp"
#include "dradapt/optimize.hpp"
#include "dradapt/rng.hpp"

namespace dradapt {

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::BudgetExhausted: return "budget-exhausted";
        case StopReason::EarlyThreshold: return "early-threshold";
        case StopReason::ObjectiveError: return "objective-error";
    }
    return "?";
}

StopReason parse_stop_reason(const std::string& s) {
    if (s == "budget-exhausted") return StopReason::BudgetExhausted;
    if (s == "early-threshold") return StopReason::EarlyThreshold;
    if (s == "objective-error") return StopReason::ObjectiveError;
    throw ParseError("unknown stop reason '" + s + "'");
}

std::vector<double> OptimizationTrace::best_so_far() const {
    std::vector<double> out;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& t : trials) {
        best_score = std::max(best_score, t.score);
        out.push_back(best_score);
    }
    return out;
}

std::size_t OptimizationTrace::evaluations() const {
    std::size_t n = 0;
    for (const auto& t : trials) n += t.cached ? 0 : 1;
    return n;
}

double OptimizationTrace::wall_time() const {
    double total = 0.0;
    for (const auto& t : trials) total += t.wall_time;
    return total;
}

bool StopCriterion::satisfied(double best_score) const {
    return kind == Kind::Threshold && threshold && best_score >= *threshold;
}

StopCriterion make_threshold_stop(double predicted_max) {
    if (!std::isfinite(predicted_max)) throw ValidationError("stop threshold must be finite");
    return {StopCriterion::Kind::Threshold, predicted_max};
}

namespace {

constexpr double kFailed = -std::numeric_limits<double>::infinity();

// Shared trial bookkeeping: caching, failure capture, stop checks.
class TrialLoop {
public:
    TrialLoop(const Objective& objective, std::size_t budget, std::uint64_t seed, const StopCriterion& stop)
        : objective_(objective), budget_(budget), stop_(stop), trial_seed_(derive_seed(seed, "projection")) {
        if (budget < 1) throw ValidationError("optimization budget must be at least 1");
    }

    bool done() const { return finished_ || trace_.trials.size() >= budget_; }
    bool seen(const HyperparamAssignment& h) const { return cache_.count(assignment_key(h)) > 0; }
    const OptimizationTrace& trace() const { return trace_; }

    void run(const HyperparamAssignment& h) {
        Trial trial;
        trial.assignment = h;
        trial.seed = trial_seed_;
        const auto key = assignment_key(h);
        if (auto it = cache_.find(key); it != cache_.end()) {
            trial.cached = true;
            trial.score = it->second.first;
            trial.error = it->second.second;
        } else {
            const auto start = std::chrono::steady_clock::now();
            try {
                trial.score = objective_(h, trial_seed_);
                if (std::isnan(trial.score)) {
                    trial.score = kFailed;
                    trial.error = "objective returned NaN";
                }
            } catch (const std::bad_alloc&) {
                throw;
            } catch (const std::exception& e) {
                trial.score = kFailed;
                trial.error = e.what();
            } catch (...) {
                trial.score = kFailed;
                trial.error = "unknown failure";
                aborted_ = true;
            }
            trial.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            cache_.emplace(key, std::make_pair(trial.score, trial.error));
        }
        const std::size_t index = trace_.trials.size();
        if (index == 0 || trial.score > trace_.trials[trace_.best].score) trace_.best = index;
        trace_.trials.push_back(std::move(trial));

        if (aborted_) {
            trace_.stop_reason = StopReason::ObjectiveError;
            finished_ = true;
        } else if (stop_.satisfied(trace_.trials[trace_.best].score)) {
            trace_.stop_reason = StopReason::EarlyThreshold;
            finished_ = true;
        }
    }

    OptimizationTrace finish() {
        if (trace_.trials.empty() || !std::isfinite(trace_.trials[trace_.best].score)) {
            std::string last = "no trials ran";
            if (!trace_.trials.empty() && trace_.trials.back().error) last = *trace_.trials.back().error;
            throw ObjectiveError("every trial failed (" + std::to_string(trace_.trials.size()) +
                                 " trials); last error: " + last);
        }
        return std::move(trace_);
    }

private:
    const Objective& objective_;
    std::size_t budget_;
    StopCriterion stop_;
    std::uint64_t trial_seed_;
    std::map<std::string, std::pair<double, std::optional<std::string>>> cache_;
    OptimizationTrace trace_;
    bool finished_ = false;
    bool aborted_ = false;
};

std::vector<double> random_unit(std::size_t dims, Rng& rng) {
    std::vector<double> u(dims);
    for (auto& v : u) v = rng.uniform();
    return u;
}

}  // namespace

OptimizationTrace random_search(const Objective& objective, const HyperparamSpace& space, std::size_t budget,
                                std::uint64_t seed, const StopCriterion& stop) {
    space.validate();
    TrialLoop loop(objective, budget, seed, stop);
    if (space.empty()) {
        loop.run({});
        return loop.finish();
    }
    Rng rng(derive_seed(seed, "proposals"));
    while (!loop.done()) loop.run(sample_assignment(space, rng));
    return loop.finish();
}

OptimizationTrace bayes_optimize(const Objective& objective, const HyperparamSpace& space, std::size_t budget,
                                 std::uint64_t seed, const StopCriterion& stop, const BayesOptions& options) {
    space.validate();
    TrialLoop loop(objective, budget, seed, stop);
    if (space.empty()) {
        loop.run({});
        return loop.finish();
    }
    if (budget < options.n_init) {
        throw ValidationError("budget " + std::to_string(budget) + " is below the " +
                              std::to_string(options.n_init) + " initial random trials");
    }

    Rng rng(derive_seed(seed, "proposals"));
    std::size_t fallbacks = 0;
    while (!loop.done()) {
        const auto& trials = loop.trace().trials;
        if (trials.size() < options.n_init) {
            loop.run(decode(space, random_unit(space.size(), rng)));
            continue;
        }

        // Unique evaluated points; failures are imputed with the worst observed score.
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& t : trials)
            if (!t.cached && std::isfinite(t.score)) worst = std::min(worst, t.score);
        for (const auto& t : trials) {
            if (t.cached) continue;
            x.push_back(encode(space, t.assignment));
            y.push_back(std::isfinite(t.score) ? t.score : worst);
        }

        std::vector<std::vector<double>> candidates;
        candidates.reserve(options.candidates);
        for (std::size_t c = 0; c < options.candidates; ++c) candidates.push_back(random_unit(space.size(), rng));

        std::optional<HyperparamAssignment> proposal;
        if (std::isfinite(worst)) {
            try {
                const GaussianProcess gp(std::move(x), y, options.noise);
                const double incumbent = *std::max_element(y.begin(), y.end());
                double best_ei = -1.0, best_ei_fresh = -1.0;
                HyperparamAssignment best_any, best_fresh;
                for (const auto& u : candidates) {
                    auto h = decode(space, u);
                    const auto [mean, sd] = gp.predict(encode(space, h));
                    const double ei = expected_improvement(mean, sd, incumbent, options.xi);
                    if (ei > best_ei) {
                        best_ei = ei;
                        best_any = h;
                    }
                    if (ei > best_ei_fresh && !loop.seen(h)) {
                        best_ei_fresh = ei;
                        best_fresh = h;
                    }
                }
                proposal = best_ei_fresh >= 0.0 ? best_fresh : best_any;
            } catch (const DegenerateInput&) {
                ++fallbacks;
            }
        } else {
            ++fallbacks;
        }
        loop.run(proposal ? *proposal : decode(space, candidates.front()));
    }
    auto trace = loop.finish();
    trace.gp_fallbacks = fallbacks;
    return trace;
}

nlohmann::json to_json(const OptimizationTrace& trace, bool timing) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : trace.trials) {
        nlohmann::json j;
        j["assignment"] = to_json(t.assignment);
        j["score"] = std::isfinite(t.score) ? nlohmann::json(t.score) : nlohmann::json(nullptr);
        j["seed"] = t.seed;
        j["cached"] = t.cached;
        if (t.error) j["error"] = *t.error;
        if (timing) j["wall_time"] = t.wall_time;
        trials.push_back(std::move(j));
    }
    nlohmann::json out;
    out["trials"] = std::move(trials);
    out["best"] = trace.best;
    out["best_score"] = trace.best_score();
    out["stop_reason"] = to_string(trace.stop_reason);
    out["evaluations"] = trace.evaluations();
    out["gp_fallbacks"] = trace.gp_fallbacks;
    if (timing) out["wall_time"] = trace.wall_time();
    return out;
}

std::string trace_to_jsonl(const OptimizationTrace& trace, bool timing) {
    const auto j = to_json(trace, timing);
    std::ostringstream out;
    for (const auto& t : j["trials"]) out << t.dump() << '\n';
    nlohmann::json footer = j;
    footer.erase("trials");
    out << footer.dump() << '\n';
    return out.str();
}

}  // namespace dradapt
