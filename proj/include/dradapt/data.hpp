#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dradapt {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Immutable N x D table of finite reals with optional integer labels.
/// Construction validates N >= 3, D >= 1, finiteness and label length.
class Dataset {
public:
    Dataset(RowMatrix points, std::optional<std::vector<int>> labels = std::nullopt,
            std::string name = "dataset");

    std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
    const RowMatrix& points() const noexcept { return points_; }
    const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
    const std::string& name() const noexcept { return name_; }

    /// FNV-1a over (N, D, row-major values); identifies the numeric content.
    std::uint64_t content_hash() const;

    Dataset scaled(double alpha) const;
    Dataset renamed(std::string name) const;

private:
    RowMatrix points_;
    std::optional<std::vector<int>> labels_;
    std::string name_;
};

struct CsvOptions {
    char delimiter = ',';
    bool has_header = false;
    /// Header name, zero-based column index, or "last".
    std::optional<std::string> label_column;
};

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_dataset(const std::string& text, const CsvOptions& options = {},
                      std::string name = "dataset");

/// Writes points (and labels as a trailing column when present) using the
/// shortest decimal form that round-trips each double exactly.
void write_dataset(const Dataset& ds, const std::filesystem::path& path, bool with_header = false);
std::string format_dataset(const Dataset& ds, bool with_header = false);

/// Writes an arbitrary matrix as headerless CSV (projections, tables).
std::string format_matrix(const RowMatrix& m);

/// Uniform sample of exactly max_n rows without replacement, in ascending
/// original row order. Returns ds unchanged when N <= max_n.
Dataset subsample(const Dataset& ds, std::size_t max_n, std::uint64_t seed);

/// Per-column z-scoring; zero-variance columns are only centered.
Dataset standardize(const Dataset& ds);

enum class SyntheticKind { IidGaussian, IidUniform, GaussianMixture, SwissRoll, HyperplaneEmbedded };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::IidGaussian;
    std::size_t n = 100;
    std::size_t d = 2;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

SyntheticKind parse_synthetic_kind(const std::string& name);
std::string to_string(SyntheticKind kind);

/// Pure function of spec. Recognised params:
///   gaussian-mixture: components (3), separation (5)
///   swiss-roll: noise (0); needs d >= 3
///   hyperplane-embedded: intrinsic_dim (2), noise (0)
Dataset generate_synthetic(const SyntheticSpec& spec);

/// One entry of a corpus manifest. Either a CSV path or an inline synthetic spec.
struct ManifestEntry {
    std::string name;
    std::optional<std::filesystem::path> path;
    std::optional<std::string> label_column;
    std::optional<SyntheticSpec> synthetic;
};

/// Accepts a JSON array of entries or an object with a "datasets" array.
/// Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
Dataset materialize(const ManifestEntry& entry, const CsvOptions& base = {});

}  // namespace dradapt
