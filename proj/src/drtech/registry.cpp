#include <algorithm>
#include <cmath>
#include <fstream>

#include "dradapt/drtech.hpp"
#include "dradapt/error.hpp"

namespace dradapt {

Projection::Projection(RowMatrix points) : points_(std::move(points)) {
    if (points_.cols() != 2) throw ValidationError("projection must have exactly 2 columns");
    if (!points_.allFinite()) throw ValidationError("projection contains non-finite values");
}

HyperparamSpace TechniqueDescriptor::space_for(std::size_t n) const {
    if (kind == TechniqueKind::External) return external->space;
    return hyperparameter_space(id, n);
}

TechniqueRegistry::TechniqueRegistry() {
    for (const char* id : {technique_id::kPca, technique_id::kClassicalMds, technique_id::kIsomap,
                           technique_id::kLle, technique_id::kTsne}) {
        techniques_.push_back({id, TechniqueKind::Builtin, std::nullopt});
    }
}

void TechniqueRegistry::register_external(const std::string& id, ExternalCommand command) {
    if (id.empty()) throw ValidationError("technique id must not be empty");
    if (command.argv.empty()) throw ValidationError("external technique '" + id + "' has no command");
    const bool taken = std::any_of(techniques_.begin(), techniques_.end(),
                                   [&](const TechniqueDescriptor& t) { return t.id == id; });
    if (taken) throw ValidationError("technique id '" + id + "' already registered");
    command.space.validate();
    techniques_.push_back({id, TechniqueKind::External, std::move(command)});
}

const TechniqueDescriptor& TechniqueRegistry::find(const std::string& id) const {
    for (const auto& t : techniques_)
        if (t.id == id) return t;
    throw LookupError("unknown technique '" + id + "'");
}

void register_external_from_file(TechniqueRegistry& registry, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open plugin descriptor " + path.string());
    try {
        const auto j = nlohmann::json::parse(in);
        ExternalCommand cmd;
        const auto& command = j.at("command");
        if (command.is_string()) {
            cmd.argv.push_back(command.get<std::string>());
        } else {
            cmd.argv = command.get<std::vector<std::string>>();
        }
        if (j.contains("space")) cmd.space = space_from_json(j.at("space"));
        registry.register_external(j.at("id").get<std::string>(), std::move(cmd));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("plugin descriptor " + path.string() + ": " + e.what());
    }
}

namespace {

std::pair<double, double> neighbor_bounds(const std::string& id, std::size_t n) {
    if (n < 8) {
        throw ValidationError(id + " needs at least 8 points, dataset has " + std::to_string(n));
    }
    double upper = std::min(100.0, std::floor(static_cast<double>(n) / 4.0));
    if (upper <= 5.0) upper = std::min(static_cast<double>(n - 1), 6.0);
    return {5.0, upper};
}

}  // namespace

HyperparamSpace hyperparameter_space(const std::string& id, std::size_t n) {
    if (id == technique_id::kPca) return {};
    if (id == technique_id::kClassicalMds) {
        return {{{"distance_power", ParamType::Real, 0.5, 2.0}}};
    }
    if (id == technique_id::kIsomap) {
        const auto [lo, hi] = neighbor_bounds(id, n);
        return {{{"n_neighbors", ParamType::Integer, lo, hi}}};
    }
    if (id == technique_id::kLle) {
        const auto [lo, hi] = neighbor_bounds(id, n);
        return {{{"n_neighbors", ParamType::Integer, lo, hi},
                 {"regularization", ParamType::LogReal, 1e-4, 1e-1}}};
    }
    if (id == technique_id::kTsne) {
        const double max_perplexity = std::min(100.0, (static_cast<double>(n) - 1.0) / 3.0);
        if (max_perplexity <= 2.0) {
            throw ValidationError("tsne-exact needs at least 8 points, dataset has " + std::to_string(n));
        }
        return {{{"perplexity", ParamType::Real, 2.0, max_perplexity},
                 {"learning_rate", ParamType::LogReal, 10.0, 1000.0},
                 {"n_iter", ParamType::Integer, 250.0, 1000.0}}};
    }
    throw LookupError("unknown technique '" + id + "'");
}

namespace {

std::size_t neighbors_param(const HyperparamAssignment& h, const Dataset& ds, const std::string& id) {
    const double k = h.at("n_neighbors");
    if (k < 1.0 || k >= static_cast<double>(ds.size())) {
        throw ValidationError(id + ": n_neighbors=" + std::to_string(static_cast<long>(k)) +
                              " must be below N=" + std::to_string(ds.size()));
    }
    return static_cast<std::size_t>(k);
}

}  // namespace

Projection project(const TechniqueDescriptor& t, const Dataset& ds, const HyperparamAssignment& h,
                   std::uint64_t seed) {
    if (t.kind == TechniqueKind::External) return run_external(t, ds, h, seed);

    const HyperparamSpace space = hyperparameter_space(t.id, ds.size());
    // Integer-valued hyperparameters that violate the dataset size are
    // reported as precondition failures, not as out-of-space values.
    if (h.count("n_neighbors")) neighbors_param(h, ds, t.id);
    validate_assignment(space, h);

    RowMatrix y;
    if (t.id == technique_id::kPca) {
        y = pca_project(ds.points());
    } else if (t.id == technique_id::kClassicalMds) {
        y = classical_mds(pairwise_distances(ds).matrix(), h.at("distance_power"));
    } else if (t.id == technique_id::kIsomap) {
        y = isomap_project(ds, neighbors_param(h, ds, t.id));
    } else if (t.id == technique_id::kLle) {
        y = lle_project(ds, neighbors_param(h, ds, t.id), h.at("regularization"));
    } else if (t.id == technique_id::kTsne) {
        TsneOptions opts;
        opts.perplexity = h.at("perplexity");
        opts.learning_rate = h.at("learning_rate");
        opts.n_iter = static_cast<int>(h.at("n_iter"));
        y = tsne_project(ds, opts, seed);
    } else {
        throw LookupError("unknown technique '" + t.id + "'");
    }
    if (!y.allFinite()) throw ProjectionError(t.id, 0, "non-finite coordinates");
    return Projection(std::move(y));
}

}  // namespace dradapt
