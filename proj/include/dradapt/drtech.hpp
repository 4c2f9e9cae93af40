#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dradapt/data.hpp"
#include "dradapt/distance.hpp"
#include "dradapt/hyperparams.hpp"

namespace dradapt {

/// N x 2 embedding of a dataset.
class Projection {
public:
    explicit Projection(RowMatrix points);

    const RowMatrix& points() const noexcept { return points_; }
    std::size_t source_n() const noexcept { return static_cast<std::size_t>(points_.rows()); }

private:
    RowMatrix points_;
};

enum class TechniqueKind { Builtin, External };

/// Command line for an external technique. Invoked as
/// `<argv...> --input <csv> --output <csv>` with the hyperparameters as one
/// JSON object on stdin; the seed is exported as DRADAPT_SEED.
struct ExternalCommand {
    std::vector<std::string> argv;
    HyperparamSpace space;
};

struct TechniqueDescriptor {
    std::string id;
    TechniqueKind kind = TechniqueKind::Builtin;
    std::optional<ExternalCommand> external;

    /// Search space for a dataset of n points. Built-in ranges depend on n.
    HyperparamSpace space_for(std::size_t n) const;
};

namespace technique_id {
inline constexpr const char* kPca = "pca";
inline constexpr const char* kClassicalMds = "mds-classical";
inline constexpr const char* kIsomap = "isomap";
inline constexpr const char* kLle = "lle";
inline constexpr const char* kTsne = "tsne-exact";
}  // namespace technique_id

class TechniqueRegistry {
public:
    /// Starts with the five built-ins.
    TechniqueRegistry();

    /// Throws ValidationError if the id is already taken.
    void register_external(const std::string& id, ExternalCommand command);

    const std::vector<TechniqueDescriptor>& list() const noexcept { return techniques_; }
    /// Throws LookupError for unknown ids.
    const TechniqueDescriptor& find(const std::string& id) const;

private:
    std::vector<TechniqueDescriptor> techniques_;
};

/// Loads {"id", "command": [..], "space": [..]} plugin descriptors.
void register_external_from_file(TechniqueRegistry& registry, const std::filesystem::path& path);

/// Declared search space of a built-in for a dataset of n points.
/// Throws LookupError for unknown ids and ValidationError when n is too small.
HyperparamSpace hyperparameter_space(const std::string& id, std::size_t n);

/// Runs a technique. Deterministic in (technique, data, h, seed).
Projection project(const TechniqueDescriptor& t, const Dataset& ds, const HyperparamAssignment& h,
                   std::uint64_t seed);

/// Spawns the external command following the plugin contract.
Projection run_external(const TechniqueDescriptor& t, const Dataset& ds, const HyperparamAssignment& h,
                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Built-in techniques, exposed for direct use and testing.

/// Projection onto the top-2 principal axes. Each output column is flipped so
/// its largest-magnitude entry is positive. D = 1 yields a zero second column.
RowMatrix pca_project(const RowMatrix& x);

/// Classical (Torgerson) MDS of the matrix dist^power.
RowMatrix classical_mds(const RowMatrix& dist, double power = 1.0, const char* technique = "mds-classical");

/// Geodesic distances over the symmetrized kNN graph. Disconnected
/// components are joined through their closest inter-component pair.
RowMatrix geodesic_distances(const DistanceMatrix& dm, std::size_t n_neighbors);
RowMatrix isomap_project(const Dataset& ds, std::size_t n_neighbors);

RowMatrix lle_project(const Dataset& ds, std::size_t n_neighbors, double regularization);

struct TsneOptions {
    double perplexity = 30.0;
    double learning_rate = 200.0;
    int n_iter = 1000;
    double exaggeration = 12.0;
    int exaggeration_iters = 250;
};

/// Symmetrized joint probabilities P (rows sum to 1 overall) from squared
/// input distances, calibrated per point to the requested perplexity.
RowMatrix tsne_joint_probabilities(const DistanceMatrix& dm, double perplexity);

/// KL(P || Q) for a Student-t embedding Y.
double tsne_kl_divergence(const RowMatrix& p, const RowMatrix& y);
/// Exact gradient of tsne_kl_divergence with respect to Y.
RowMatrix tsne_gradient(const RowMatrix& p, const RowMatrix& y);

RowMatrix tsne_project(const Dataset& ds, const TsneOptions& options, std::uint64_t seed);

}  // namespace dradapt
