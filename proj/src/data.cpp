#include "dradapt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dradapt/error.hpp"
#include "dradapt/rng.hpp"

namespace dradapt {

Dataset::Dataset(RowMatrix points, std::optional<std::vector<int>> labels, std::string name)
    : points_(std::move(points)), labels_(std::move(labels)), name_(std::move(name)) {
    if (points_.rows() < 3) {
        throw ValidationError("dataset '" + name_ + "' needs at least 3 points, got " +
                              std::to_string(points_.rows()));
    }
    if (points_.cols() < 1) throw ValidationError("dataset '" + name_ + "' has no columns");
    if (!points_.allFinite()) throw ValidationError("dataset '" + name_ + "' contains NaN or Inf");
    if (labels_ && labels_->size() != size()) {
        throw ValidationError("dataset '" + name_ + "': label count does not match point count");
    }
}

std::uint64_t Dataset::content_hash() const {
    const std::uint64_t shape[2] = {size(), dim()};
    std::uint64_t h = fnv1a(shape, sizeof(shape));
    return fnv1a(points_.data(), sizeof(double) * static_cast<std::size_t>(points_.size()), h);
}

Dataset Dataset::scaled(double alpha) const {
    return Dataset(points_ * alpha, labels_, name_);
}

Dataset Dataset::renamed(std::string name) const {
    return Dataset(points_, labels_, std::move(name));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::vector<std::string>> split_csv(const std::string& text, char delim) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        const bool blank = row.size() == 1 && row[0].find_first_not_of(" \t") == std::string::npos;
        if (!blank) rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\n') {
            end_row();
        } else if (c == '\r') {
            // swallowed; CRLF handled by the '\n' that follows
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view cell, std::size_t row, std::size_t col) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "' at row " +
                         std::to_string(row + 1) + ", column " + std::to_string(col + 1));
    }
    return value;
}

std::size_t resolve_label_column(const std::string& spec, const std::vector<std::string>* header,
                                 std::size_t width) {
    if (spec == "last") return width - 1;
    if (header) {
        const auto it = std::find(header->begin(), header->end(), spec);
        if (it != header->end()) return static_cast<std::size_t>(it - header->begin());
    }
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), index);
    if (ec == std::errc() && ptr == spec.data() + spec.size() && index < width) return index;
    throw ValidationError("label column '" + spec + "' not found");
}

void append_double(std::string& out, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

Dataset parse_dataset(const std::string& text, const CsvOptions& options, std::string name) {
    auto rows = split_csv(text, options.delimiter);
    std::optional<std::vector<std::string>> header;
    if (options.has_header) {
        if (rows.empty()) throw ParseError("missing header row");
        header = std::move(rows.front());
        rows.erase(rows.begin());
    }
    if (rows.empty()) throw ValidationError("dataset '" + name + "' has no rows");

    const std::size_t width = header ? header->size() : rows.front().size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw ParseError("ragged row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(width) + " fields, got " +
                             std::to_string(rows[r].size()));
        }
    }

    std::optional<std::size_t> label_col;
    if (options.label_column) {
        label_col = resolve_label_column(*options.label_column, header ? &*header : nullptr, width);
    }
    const std::size_t d = width - (label_col ? 1 : 0);
    if (d == 0) throw ValidationError("dataset '" + name + "' has no feature columns");

    RowMatrix points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    std::optional<std::vector<int>> labels;
    if (label_col) labels.emplace(rows.size());

    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < width; ++c) {
            const double v = parse_number(rows[r][c], r, c);
            if (label_col && c == *label_col) {
                if (v != std::floor(v)) {
                    throw ParseError("label at row " + std::to_string(r + 1) + " is not an integer");
                }
                (*labels)[r] = static_cast<int>(v);
            } else {
                points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out_col++)) = v;
            }
        }
    }
    return Dataset(std::move(points), std::move(labels), std::move(name));
}

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str(), options, path.stem().string());
}

std::string format_matrix(const RowMatrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out.push_back(',');
            append_double(out, m(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

std::string format_dataset(const Dataset& ds, bool with_header) {
    std::string out;
    if (with_header) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            if (j) out.push_back(',');
            out += "x" + std::to_string(j);
        }
        if (ds.labels()) out += ",label";
        out.push_back('\n');
    }
    const auto& p = ds.points();
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (j) out.push_back(',');
            append_double(out, p(i, j));
        }
        if (ds.labels()) out += "," + std::to_string((*ds.labels())[static_cast<std::size_t>(i)]);
        out.push_back('\n');
    }
    return out;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path, bool with_header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << format_dataset(ds, with_header);
}

// ---------------------------------------------------------------------------

Dataset subsample(const Dataset& ds, std::size_t max_n, std::uint64_t seed) {
    if (max_n < 3) throw ValidationError("subsample size must be at least 3");
    if (ds.size() <= max_n) return ds;

    Rng rng(seed);
    auto perm = rng.permutation(ds.size());
    perm.resize(max_n);
    std::sort(perm.begin(), perm.end());

    RowMatrix pts(static_cast<Eigen::Index>(max_n), ds.points().cols());
    std::optional<std::vector<int>> labels;
    if (ds.labels()) labels.emplace(max_n);
    for (std::size_t r = 0; r < max_n; ++r) {
        pts.row(static_cast<Eigen::Index>(r)) = ds.points().row(static_cast<Eigen::Index>(perm[r]));
        if (labels) (*labels)[r] = (*ds.labels())[perm[r]];
    }
    return Dataset(std::move(pts), std::move(labels), ds.name());
}

Dataset standardize(const Dataset& ds) {
    RowMatrix p = ds.points();
    const double n = static_cast<double>(p.rows());
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        const double mean = p.col(j).sum() / n;
        p.col(j).array() -= mean;
        const double sd = std::sqrt(p.col(j).squaredNorm() / n);
        if (sd > 0.0) p.col(j) /= sd;
    }
    return Dataset(std::move(p), ds.labels(), ds.name());
}

// ---------------------------------------------------------------------------
// Synthetic data

SyntheticKind parse_synthetic_kind(const std::string& name) {
    if (name == "iid-gaussian") return SyntheticKind::IidGaussian;
    if (name == "iid-uniform") return SyntheticKind::IidUniform;
    if (name == "gaussian-mixture") return SyntheticKind::GaussianMixture;
    if (name == "swiss-roll") return SyntheticKind::SwissRoll;
    if (name == "hyperplane-embedded") return SyntheticKind::HyperplaneEmbedded;
    throw ValidationError("unknown synthetic kind '" + name + "'");
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::IidGaussian: return "iid-gaussian";
        case SyntheticKind::IidUniform: return "iid-uniform";
        case SyntheticKind::GaussianMixture: return "gaussian-mixture";
        case SyntheticKind::SwissRoll: return "swiss-roll";
        case SyntheticKind::HyperplaneEmbedded: return "hyperplane-embedded";
    }
    throw ValidationError("unknown synthetic kind");
}

namespace {

double param_or(const SyntheticSpec& spec, const std::string& key, double fallback) {
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
}

// Columns form an orthonormal basis of a random m-dimensional subspace of R^d.
Eigen::MatrixXd random_orthonormal(std::size_t d, std::size_t m, Rng& rng) {
    Eigen::MatrixXd basis(d, m);
    for (std::size_t c = 0; c < m; ++c) {
        for (;;) {
            Eigen::VectorXd v(d);
            for (std::size_t r = 0; r < d; ++r) v(static_cast<Eigen::Index>(r)) = rng.normal();
            for (std::size_t p = 0; p < c; ++p) {
                v -= basis.col(static_cast<Eigen::Index>(p)).dot(v) * basis.col(static_cast<Eigen::Index>(p));
            }
            const double norm = v.norm();
            if (norm > 1e-8) {
                basis.col(static_cast<Eigen::Index>(c)) = v / norm;
                break;
            }
        }
    }
    return basis;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 3) throw ValidationError("synthetic spec needs n >= 3");
    if (spec.d < 1) throw ValidationError("synthetic spec needs d >= 1");

    Rng rng(spec.seed);
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto d = static_cast<Eigen::Index>(spec.d);
    RowMatrix pts = RowMatrix::Zero(n, d);
    std::optional<std::vector<int>> labels;
    std::string name = to_string(spec.kind) + "-n" + std::to_string(spec.n) + "-d" +
                       std::to_string(spec.d) + "-s" + std::to_string(spec.seed);

    switch (spec.kind) {
        case SyntheticKind::IidGaussian:
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = rng.normal();
            break;
        case SyntheticKind::IidUniform:
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = rng.uniform();
            break;
        case SyntheticKind::GaussianMixture: {
            const auto components = static_cast<std::size_t>(param_or(spec, "components", 3));
            const double separation = param_or(spec, "separation", 5.0);
            if (components < 1) throw ValidationError("gaussian-mixture needs components >= 1");
            RowMatrix centers(static_cast<Eigen::Index>(components), d);
            for (Eigen::Index c = 0; c < centers.rows(); ++c)
                for (Eigen::Index j = 0; j < d; ++j) centers(c, j) = separation * rng.normal();
            // Component c receives a share proportional to imbalance^-c.
            const double imbalance = param_or(spec, "imbalance", 1.0);
            if (!(imbalance >= 1.0)) throw ValidationError("gaussian-mixture needs imbalance >= 1");
            std::vector<std::size_t> assignment(spec.n);
            if (imbalance == 1.0 || components == 1 || spec.n < components) {
                for (std::size_t i = 0; i < spec.n; ++i) assignment[i] = i % components;
            } else {
                std::vector<double> share(components);
                double total = 0.0;
                for (std::size_t c = 0; c < components; ++c) total += share[c] = std::pow(imbalance, -static_cast<double>(c));
                std::vector<std::size_t> count(components, 1);
                std::size_t left = spec.n - components;
                std::vector<double> exact(components);
                for (std::size_t c = 0; c < components; ++c) {
                    exact[c] = static_cast<double>(spec.n - components) * share[c] / total;
                    const auto whole = static_cast<std::size_t>(exact[c]);
                    count[c] += whole;
                    left -= whole;
                    exact[c] -= static_cast<double>(whole);
                }
                std::vector<std::size_t> order(components);
                std::iota(order.begin(), order.end(), std::size_t{0});
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return exact[a] > exact[b]; });
                for (std::size_t r = 0; r < left; ++r) ++count[order[r]];
                std::size_t i = 0;
                for (std::size_t c = 0; c < components; ++c)
                    for (std::size_t m = 0; m < count[c]; ++m) assignment[i++] = c;
            }
            labels.emplace(spec.n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto c = assignment[static_cast<std::size_t>(i)];
                (*labels)[static_cast<std::size_t>(i)] = static_cast<int>(c);
                for (Eigen::Index j = 0; j < d; ++j)
                    pts(i, j) = centers(static_cast<Eigen::Index>(c), j) + rng.normal();
            }
            break;
        }
        case SyntheticKind::SwissRoll: {
            if (spec.d < 3) throw ValidationError("swiss-roll needs d >= 3");
            const double noise = param_or(spec, "noise", 0.0);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * rng.uniform());
                const double h = 21.0 * rng.uniform();
                pts(i, 0) = t * std::cos(t);
                pts(i, 1) = h;
                pts(i, 2) = t * std::sin(t);
                if (noise > 0.0)
                    for (Eigen::Index j = 0; j < d; ++j) pts(i, j) += noise * rng.normal();
            }
            break;
        }
        case SyntheticKind::HyperplaneEmbedded: {
            const auto m = static_cast<std::size_t>(param_or(spec, "intrinsic_dim", 2));
            const double noise = param_or(spec, "noise", 0.0);
            if (m < 1 || m > spec.d) throw ValidationError("intrinsic_dim must lie in [1, d]");
            const Eigen::MatrixXd basis = random_orthonormal(spec.d, m, rng);
            Eigen::MatrixXd latent(n, static_cast<Eigen::Index>(m));
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < latent.cols(); ++j) latent(i, j) = rng.normal();
            pts = latent * basis.transpose();
            if (noise > 0.0)
                for (Eigen::Index i = 0; i < n; ++i)
                    for (Eigen::Index j = 0; j < d; ++j) pts(i, j) += noise * rng.normal();
            break;
        }
    }
    return Dataset(std::move(pts), std::move(labels), std::move(name));
}

// ---------------------------------------------------------------------------
// Manifests

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + path.string() + ": " + e.what());
    }
    const nlohmann::json& list = doc.is_object() ? doc.at("datasets") : doc;
    if (!list.is_array()) throw ParseError("manifest must be an array of dataset entries");

    std::vector<ManifestEntry> entries;
    const auto base = path.parent_path();
    try {
        for (const auto& item : list) {
            ManifestEntry e;
            if (item.contains("path")) {
                std::filesystem::path p = item.at("path").get<std::string>();
                e.path = p.is_absolute() ? p : base / p;
            }
            if (item.contains("label_column") && !item.at("label_column").is_null()) {
                const auto& lc = item.at("label_column");
                e.label_column = lc.is_string() ? lc.get<std::string>() : std::to_string(lc.get<long>());
            }
            if (item.contains("synthetic")) {
                const auto& s = item.at("synthetic");
                SyntheticSpec spec;
                spec.kind = parse_synthetic_kind(s.at("kind").get<std::string>());
                spec.n = s.at("n").get<std::size_t>();
                spec.d = s.at("d").get<std::size_t>();
                spec.seed = s.value("seed", std::uint64_t{0});
                if (s.contains("params")) spec.params = s.at("params").get<std::map<std::string, double>>();
                e.synthetic = spec;
            }
            if (!e.path && !e.synthetic) throw ParseError("manifest entry needs 'path' or 'synthetic'");
            if (item.contains("name")) {
                e.name = item.at("name").get<std::string>();
            } else {
                e.name = e.path ? e.path->stem().string() : generate_synthetic(*e.synthetic).name();
            }
            entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("manifest " + path.string() + ": " + ex.what());
    }
    return entries;
}

Dataset materialize(const ManifestEntry& entry, const CsvOptions& base) {
    if (entry.synthetic) return generate_synthetic(*entry.synthetic).renamed(entry.name);
    CsvOptions opts = base;
    if (entry.label_column) opts.label_column = entry.label_column;
    return load_dataset(*entry.path, opts).renamed(entry.name);
}

}  // namespace dradapt
