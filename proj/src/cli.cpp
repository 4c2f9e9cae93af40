#include "dradapt/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dradapt/complexity.hpp"
#include "dradapt/error.hpp"
#include "dradapt/parallel.hpp"
#include "dradapt/workflow.hpp"

namespace dradapt {
namespace {

using nlohmann::json;

struct Common {
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    bool timing = false;
    bool csv = false;
    bool json_out = false;
    bool quiet = false;
    std::vector<std::string> externals;
    // dataset loading
    bool header = false;
    std::string delimiter = ",";
    std::string label_column;
    bool standardize = false;
    std::size_t max_n = 3000;
};

struct WorkflowFlags {
    std::string metric = "tnc";
    std::size_t k = kDefaultQualityK;
    std::size_t budget = 50;
    std::size_t n_init = 10;
    std::vector<std::string> techniques;
};

void add_dataset_flags(CLI::App* app, Common& c) {
    app->add_flag("--header", c.header, "First CSV row is a header");
    app->add_option("--delimiter", c.delimiter, "CSV field delimiter")->capture_default_str();
    app->add_option("--label-column", c.label_column, "Label column: header name, zero-based index, or 'last'");
    app->add_flag("--standardize", c.standardize, "Z-score each column after loading");
    app->add_option("--max-n", c.max_n, "Subsample datasets larger than this")->capture_default_str();
}

void add_workflow_flags(CLI::App* app, WorkflowFlags& w, bool techniques) {
    app->add_option("--metric", w.metric, "tnc | mrre | spearman | pearson")->capture_default_str();
    app->add_option("--k", w.k, "Neighborhood size of local metrics")->capture_default_str();
    app->add_option("--budget", w.budget, "Trials per technique")->capture_default_str();
    app->add_option("--n-init", w.n_init, "Random trials before the surrogate takes over")->capture_default_str();
    if (techniques) app->add_option("--techniques", w.techniques, "Technique ids (default: all)")->delimiter(',');
}

CsvOptions csv_options(const Common& c) {
    if (c.delimiter.size() != 1) throw ValidationError("--delimiter must be a single character");
    CsvOptions o;
    o.delimiter = c.delimiter.front();
    o.has_header = c.header;
    if (!c.label_column.empty()) o.label_column = c.label_column;
    return o;
}

Dataset load(const std::string& path, const Common& c) {
    Dataset ds = load_dataset(path, csv_options(c));
    ds = ds.renamed(std::filesystem::path(path).stem().string());
    if (c.standardize) ds = standardize(ds);
    return subsample(ds, c.max_n, derive_seed(c.seed, "subsample"));
}

std::vector<Dataset> load_corpus(const std::string& manifest, const Common& c) {
    std::vector<Dataset> corpus;
    for (const auto& entry : load_manifest(manifest)) {
        Dataset ds = materialize(entry, csv_options(c));
        if (c.standardize) ds = standardize(ds);
        corpus.push_back(subsample(ds, c.max_n, derive_seed(c.seed, "subsample")));
    }
    return corpus;
}

TechniqueRegistry make_registry(const Common& c) {
    TechniqueRegistry registry;
    for (const auto& path : c.externals) register_external_from_file(registry, path);
    return registry;
}

std::vector<TechniqueDescriptor> select_techniques(const TechniqueRegistry& registry,
                                                   const std::vector<std::string>& ids) {
    if (ids.empty()) return registry.list();
    std::vector<TechniqueDescriptor> out;
    for (const auto& id : ids) out.push_back(registry.find(id));
    return out;
}

WorkflowConfig workflow_config(const WorkflowFlags& w, const Common& c) {
    if (w.budget < 1) throw ValidationError("--budget must be at least 1");
    WorkflowConfig config;
    config.metric = parse_quality_metric(w.metric);
    config.quality_k = w.k;
    config.budget = w.budget;
    config.seed = c.seed;
    config.max_n = c.max_n;
    config.bayes.n_init = w.n_init;
    return config;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

void emit(std::ostream& out, json j) {
    j["schema"] = kReportSchema;
    out << j.dump(2) << '\n';
}

std::string csv_number(double v) {
    if (!std::isfinite(v)) return "";
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

// Values from --config are spliced in only for options absent from the command line.
std::vector<std::string> apply_config(CLI::App& app, const std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!path) return args;

    std::size_t sub_pos = args.size();
    CLI::App* sub = nullptr;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if ((sub = app.get_subcommand_no_throw(args[i])) != nullptr) {
            sub_pos = i;
            break;
        }
    }
    const json config = read_json_file(*path);
    if (!config.is_object()) throw ParseError("config file must hold a JSON object");

    const auto given = [&](const std::string& flag) {
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : config.items()) {
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
        if (!opt) opt = app.get_option_no_throw(flag);
        if (!opt) throw ValidationError("config key '" + key + "' matches no option");
        if (key == "config" || given(flag)) continue;
        const auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value.is_boolean()) {
            if (value.get<bool>()) extra.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& v : value) {
                extra.push_back(flag);
                extra.push_back(scalar(v));
            }
        } else {
            extra.push_back(flag);
            extra.push_back(scalar(value));
        }
    }
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(std::min(sub_pos + 1, args.size())));
    out.insert(out.end(), extra.begin(), extra.end());
    if (sub_pos + 1 < args.size()) out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1), args.end());
    return out;
}

json features_json(const FeatureVector& fv) {
    json entries = json::array();
    for (const auto& e : fv.entries) {
        json j = {{"metric", e.metric == ComplexityMetric::Pds ? "PDS" : "MNC"}, {"value", e.value}};
        if (e.k) j["k"] = *e.k;
        entries.push_back(std::move(j));
    }
    return entries;
}

json training_summary(const ModelStore& store) {
    json models = json::object();
    for (const auto& t : store.techniques()) {
        const auto [lo, hi] = store.model(t).training_residual_range();
        models[t] = {{"residual_min", lo}, {"residual_max", hi}};
    }
    return models;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structural complexity metrics and dataset-adaptive DR workflows", "dradapt"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "dradapt 1.0");

    Common c;
    std::string config_path;
    app.add_option("--seed", c.seed, "Seed for every randomized step")->capture_default_str();
    app.add_option("--workers", c.workers, "Worker threads (0 = available parallelism)");
    app.add_option("--config", config_path, "JSON file of flag values; explicit flags win");
    app.add_flag("--timing", c.timing, "Include wall-clock fields in reports");
    app.add_flag("--csv", c.csv, "Emit CSV instead of JSON");
    app.add_flag("--json", c.json_out, "Emit JSON (default)");
    app.add_flag("--quiet", c.quiet, "Suppress progress messages on stderr");
    app.add_option("--external", c.externals, "External technique descriptor (JSON); repeatable");

    // complexity
    auto* cx = app.add_subcommand("complexity", "PDS and MNC features of a dataset");
    std::string cx_data;
    std::vector<std::size_t> cx_ks = kDefaultMncKs;
    std::string cx_cache;
    cx->add_option("data", cx_data, "Dataset CSV")->required();
    cx->add_option("--ks", cx_ks, "MNC neighborhood sizes")->delimiter(',');
    cx->add_option("--cache-dir", cx_cache, "Reuse distance matrices stored in this directory");
    add_dataset_flags(cx, c);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score a projection against its source data");
    std::string ev_hi, ev_lo, ev_metric = "tnc";
    std::size_t ev_k = kDefaultQualityK;
    ev->add_option("--hi", ev_hi, "High-dimensional CSV")->required();
    ev->add_option("--lo", ev_lo, "Projection CSV")->required();
    ev->add_option("--metric", ev_metric, "tnc | mrre | spearman | pearson")->capture_default_str();
    ev->add_option("--k", ev_k, "Neighborhood size of local metrics")->capture_default_str();
    add_dataset_flags(ev, c);

    // project
    auto* pj = app.add_subcommand("project", "Run one technique with fixed hyperparameters");
    std::string pj_data, pj_technique, pj_params = "{}", pj_output, pj_metric;
    std::size_t pj_k = kDefaultQualityK;
    pj->add_option("data", pj_data, "Dataset CSV")->required();
    pj->add_option("--technique", pj_technique, "Technique id")->required();
    pj->add_option("--params", pj_params, "Hyperparameters as a JSON object")->capture_default_str();
    pj->add_option("--output", pj_output, "Also write the projection as CSV");
    pj->add_option("--metric", pj_metric, "Score the projection with this metric");
    pj->add_option("--k", pj_k, "Neighborhood size of local metrics")->capture_default_str();
    add_dataset_flags(pj, c);

    // optimize
    auto* op = app.add_subcommand("optimize", "Hyperparameter search for one technique (JSON lines trace)");
    std::string op_data, op_technique, op_method = "bayes";
    std::optional<double> op_threshold;
    WorkflowFlags op_w;
    op->add_option("data", op_data, "Dataset CSV")->required();
    op->add_option("--technique", op_technique, "Technique id")->required();
    op->add_option("--method", op_method, "bayes | random")->capture_default_str();
    op->add_option("--threshold", op_threshold, "Stop once this score is reached");
    add_workflow_flags(op, op_w, false);
    add_dataset_flags(op, c);

    // pretrain
    auto* pt = app.add_subcommand("pretrain", "Fit per-technique maximum-accuracy regressors on a corpus");
    std::string pt_corpus, pt_output, pt_regressor = "random-forest";
    std::vector<std::size_t> pt_ks = kDefaultMncKs;
    WorkflowFlags pt_w;
    pt->add_option("--corpus", pt_corpus, "Corpus manifest (JSON)")->required();
    pt->add_option("--output", pt_output, "Write the model store here instead of stdout");
    pt->add_option("--regressor", pt_regressor, "linear | polynomial2 | knn | random-forest")->capture_default_str();
    pt->add_option("--ks", pt_ks, "MNC neighborhood sizes")->delimiter(',');
    add_workflow_flags(pt, pt_w, true);
    add_dataset_flags(pt, c);

    // predict
    auto* pr = app.add_subcommand("predict", "Predicted maximum accuracy per technique");
    std::string pr_data, pr_store;
    pr->add_option("data", pr_data, "Dataset CSV")->required();
    pr->add_option("--store", pr_store, "Model store from pretrain")->required();
    add_dataset_flags(pr, c);

    // adaptive-run
    auto* ad = app.add_subcommand("adaptive-run", "Dataset-adaptive workflow: rank, then optimize with early stop");
    std::string ad_data, ad_store, ad_projection;
    std::size_t ad_top_m = 1;
    double ad_fraction = 1.0;
    bool ad_compare = false;
    WorkflowFlags ad_w;
    ad->add_option("data", ad_data, "Dataset CSV")->required();
    ad->add_option("--store", ad_store, "Model store from pretrain")->required();
    ad->add_option("--top-m", ad_top_m, "Number of top-ranked techniques to optimize")->capture_default_str();
    ad->add_option("--threshold-fraction", ad_fraction, "Stop at this fraction of the prediction")
        ->capture_default_str();
    ad->add_option("--projection-out", ad_projection, "Write the best projection as CSV");
    ad->add_flag("--compare", ad_compare, "Also run the conventional workflow and report the comparison");
    add_workflow_flags(ad, ad_w, true);
    add_dataset_flags(ad, c);

    // conventional-run
    auto* cv = app.add_subcommand("conventional-run", "Full-budget optimization of every technique");
    std::string cv_data, cv_projection;
    WorkflowFlags cv_w;
    cv->add_option("data", cv_data, "Dataset CSV")->required();
    cv->add_option("--projection-out", cv_projection, "Write the best projection as CSV");
    add_workflow_flags(cv, cv_w, true);
    add_dataset_flags(cv, c);

    // benchmark
    auto* bm = app.add_subcommand("benchmark", "Train/test comparison of adaptive and conventional workflows");
    std::string bm_corpus, bm_regressor = "random-forest";
    std::size_t bm_splits = 5;
    double bm_test = 0.2, bm_fraction = 1.0;
    std::vector<std::size_t> bm_top_m = {1, 3};
    std::vector<std::size_t> bm_ks = kDefaultMncKs;
    WorkflowFlags bm_w;
    bm->add_option("--corpus", bm_corpus, "Corpus manifest (JSON)")->required();
    bm->add_option("--regressor", bm_regressor, "linear | polynomial2 | knn | random-forest")->capture_default_str();
    bm->add_option("--split-seeds", bm_splits, "Number of train/test splits")->capture_default_str();
    bm->add_option("--test-fraction", bm_test, "Share of datasets held out")->capture_default_str();
    bm->add_option("--top-m", bm_top_m, "Adaptive variants to run")->delimiter(',');
    bm->add_option("--threshold-fraction", bm_fraction, "Stop at this fraction of the prediction")
        ->capture_default_str();
    bm->add_option("--ks", bm_ks, "MNC neighborhood sizes")->delimiter(',');
    add_workflow_flags(bm, bm_w, false);
    add_dataset_flags(bm, c);

    // generate
    auto* gn = app.add_subcommand("generate", "Write a synthetic corpus manifest");
    std::size_t gn_count = 40, gn_n_min = 100, gn_n_max = 150;
    std::string gn_csv_dir;
    gn->add_option("--count", gn_count, "Number of datasets")->capture_default_str();
    gn->add_option("--n-min", gn_n_min, "Smallest point count")->capture_default_str();
    gn->add_option("--n-max", gn_n_max, "Largest point count")->capture_default_str();
    gn->add_option("--csv-dir", gn_csv_dir, "Materialize each dataset as CSV here and reference it by path");

    try {
        std::vector<std::string> args = apply_config(app, raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "dradapt 1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return dynamic_cast<const ValidationError*>(&e) ? 1 : 2;
    }

    std::ostream* log = c.quiet ? nullptr : &err;
    try {
        set_worker_count(c.workers);

        if (cx->parsed()) {
            const Dataset ds = load(cx_data, c);
            std::vector<std::size_t> ks;
            for (auto k : cx_ks) {
                if (k < 1) throw ValidationError("MNC k must be positive");
                if (k >= ds.size()) {
                    err << "warning: k=" << k << " exceeds N-1 for " << ds.size() << " points; using "
                        << ds.size() - 1 << '\n';
                    k = ds.size() - 1;
                }
                ks.push_back(k);
            }
            const DistanceMatrix dm = cx_cache.empty() ? pairwise_distances(ds)
                                                       : cached_pairwise_distances(ds, cx_cache);
            const FeatureVector fv = complexity_features(dm, ks);
            if (c.csv) {
                const auto tags = fv.tags();
                const auto values = fv.values();
                for (std::size_t i = 0; i < tags.size(); ++i) out << (i ? "," : "") << tags[i];
                out << '\n';
                for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << csv_number(values[i]);
                out << '\n';
            } else {
                emit(out, {{"dataset", ds.name()},
                           {"n", ds.size()},
                           {"d", ds.dim()},
                           {"features", features_json(fv)},
                           {"tags", fv.tags()},
                           {"values", fv.values()}});
            }
            return 0;
        }

        if (ev->parsed()) {
            const auto opts = csv_options(c);
            const Dataset hi = load_dataset(ev_hi, opts);
            CsvOptions lo_opts = opts;
            lo_opts.label_column.reset();
            const Dataset lo = load_dataset(ev_lo, lo_opts);
            const QualityMetric metric = parse_quality_metric(ev_metric);
            const QualityScore s = evaluate_quality(hi.points(), lo.points(), metric, ev_k);
            if (c.csv) {
                out << "metric,value,k\n" << to_string(metric) << ',' << csv_number(s.value) << ','
                    << (s.k ? std::to_string(*s.k) : "") << '\n';
            } else {
                json j = {{"metric", to_string(metric)}, {"value", s.value}};
                j["k"] = s.k ? json(*s.k) : json(nullptr);
                if (s.components) j["components"] = {s.components->first, s.components->second};
                emit(out, std::move(j));
            }
            return 0;
        }

        if (pj->parsed()) {
            const Dataset ds = load(pj_data, c);
            const auto registry = make_registry(c);
            const auto& t = registry.find(pj_technique);
            HyperparamAssignment h;
            try {
                h = json::parse(pj_params).get<HyperparamAssignment>();
            } catch (const json::exception& e) {
                throw ParseError(std::string("--params: ") + e.what());
            }
            const std::uint64_t seed = technique_seed(c.seed, t.id);
            const Projection p = project(t, ds, h, seed);
            if (!pj_output.empty()) write_text(pj_output, format_matrix(p.points()));
            if (c.csv) {
                out << format_matrix(p.points());
                return 0;
            }
            json j = {{"dataset", ds.name()}, {"technique", t.id}, {"assignment", to_json(h)}, {"seed", seed}};
            if (!pj_metric.empty()) {
                const QualityScore s = evaluate_quality(ds.points(), p.points(), parse_quality_metric(pj_metric), pj_k);
                j["score"] = {{"metric", to_string(s.metric)}, {"value", s.value}};
            }
            json rows = json::array();
            for (Eigen::Index i = 0; i < p.points().rows(); ++i) rows.push_back({p.points()(i, 0), p.points()(i, 1)});
            j["projection"] = std::move(rows);
            emit(out, std::move(j));
            return 0;
        }

        if (op->parsed()) {
            const Dataset ds = load(op_data, c);
            const auto registry = make_registry(c);
            const auto& t = registry.find(op_technique);
            const WorkflowConfig config = workflow_config(op_w, c);
            const QualityEvaluator evaluator(pairwise_distances(ds), config.metric, config.quality_k);
            const HyperparamSpace space = t.space_for(ds.size());
            const Objective objective = [&](const HyperparamAssignment& h, std::uint64_t seed) {
                return evaluator.score(project(t, ds, h, seed).points()).value;
            };
            const StopCriterion stop = op_threshold ? make_threshold_stop(*op_threshold) : StopCriterion{};
            const std::uint64_t seed = technique_seed(c.seed, t.id);
            OptimizationTrace trace;
            if (op_method == "bayes") {
                trace = bayes_optimize(objective, space, config.budget, seed, stop, config.bayes);
            } else if (op_method == "random") {
                trace = random_search(objective, space, config.budget, seed, stop);
            } else {
                throw ValidationError("--method must be 'bayes' or 'random'");
            }
            if (c.csv) {
                out << "trial";
                for (const auto& d : space.dims) out << ',' << d.name;
                out << ",score,cached" << (c.timing ? ",wall_time" : "") << '\n';
                for (std::size_t i = 0; i < trace.trials.size(); ++i) {
                    const auto& tr = trace.trials[i];
                    out << i;
                    for (const auto& d : space.dims) out << ',' << csv_number(tr.assignment.at(d.name));
                    out << ',' << csv_number(tr.score) << ',' << (tr.cached ? 1 : 0);
                    if (c.timing) out << ',' << csv_number(tr.wall_time);
                    out << '\n';
                }
            } else {
                out << trace_to_jsonl(trace, c.timing);
            }
            return 0;
        }

        if (pt->parsed()) {
            const auto corpus = load_corpus(pt_corpus, c);
            const auto registry = make_registry(c);
            const WorkflowConfig config = workflow_config(pt_w, c);
            const ModelStore store = pretrain(corpus, select_techniques(registry, pt_w.techniques), config,
                                              parse_regression_kind(pt_regressor), pt_ks, log);
            json store_json = store.to_json();
            if (pt_output.empty()) {
                out << store_json.dump(2) << '\n';
            } else {
                write_text(pt_output, store_json.dump(2) + "\n");
                emit(out, {{"store", pt_output},
                           {"corpus_hash", store.manifest.corpus_hash},
                           {"datasets", store.manifest.training.size()},
                           {"techniques", store.techniques()},
                           {"models", training_summary(store)}});
            }
            return 0;
        }

        if (pr->parsed()) {
            const ModelStore store = ModelStore::from_json(read_json_file(pr_store));
            const Dataset ds = load(pr_data, c);
            const FeatureVector fv = complexity_features(ds, store.manifest.feature_ks);
            const auto predictions = predict_max_accuracy(store, fv.values());
            const auto ranked = rank_techniques(predictions);
            if (c.csv) {
                out << "rank,technique,predicted\n";
                for (std::size_t i = 0; i < ranked.size(); ++i)
                    out << i + 1 << ',' << ranked[i].first << ',' << csv_number(ranked[i].second) << '\n';
            } else {
                json ranking = json::array();
                for (const auto& [id, v] : ranked) ranking.push_back(id);
                emit(out, {{"dataset", ds.name()},
                           {"metric", to_string(store.manifest.metric)},
                           {"features", features_json(fv)},
                           {"predictions", predictions},
                           {"ranking", ranking}});
            }
            return 0;
        }

        if (ad->parsed()) {
            const ModelStore store = ModelStore::from_json(read_json_file(ad_store));
            const Dataset ds = load(ad_data, c);
            const auto registry = make_registry(c);
            WorkflowConfig config = workflow_config(ad_w, c);
            if (ad->count("--metric") == 0) config.metric = store.manifest.metric;
            if (ad->count("--k") == 0) config.quality_k = store.manifest.quality_k;
            const WorkflowResult adaptive = adaptive_optimize(ds, store, registry, config, {ad_top_m, ad_fraction});
            if (!ad_projection.empty()) write_text(ad_projection, format_matrix(adaptive.projection));
            if (ad_compare) {
                const WorkflowResult conventional =
                    conventional_optimize(ds, select_techniques(registry, ad_w.techniques), config);
                const CompareReport report = compare(adaptive, conventional);
                if (c.csv) {
                    out << "dataset,metric,adaptive_score,conventional_score,accuracy_delta,trial_count_ratio,"
                           "evaluation_ratio"
                        << (c.timing ? ",wall_time_ratio" : "") << '\n'
                        << report.dataset << ',' << to_string(report.metric) << ','
                        << csv_number(adaptive.final_score) << ',' << csv_number(conventional.final_score) << ','
                        << csv_number(report.accuracy_delta) << ',' << csv_number(report.trial_count_ratio) << ','
                        << csv_number(report.evaluation_ratio);
                    if (c.timing) out << ',' << csv_number(report.wall_time_ratio);
                    out << '\n';
                } else {
                    emit(out, to_json(report, adaptive, conventional, c.timing));
                }
            } else if (c.csv) {
                out << "dataset,mode,best_technique,final_score,total_trials,evaluations\n"
                    << adaptive.dataset << ',' << adaptive.mode << ',' << adaptive.best_technique << ','
                    << csv_number(adaptive.final_score) << ',' << adaptive.total_trials() << ','
                    << adaptive.evaluations() << '\n';
            } else {
                emit(out, to_json(adaptive, c.timing));
            }
            return 0;
        }

        if (cv->parsed()) {
            const Dataset ds = load(cv_data, c);
            const auto registry = make_registry(c);
            const WorkflowConfig config = workflow_config(cv_w, c);
            const WorkflowResult result =
                conventional_optimize(ds, select_techniques(registry, cv_w.techniques), config);
            if (!cv_projection.empty()) write_text(cv_projection, format_matrix(result.projection));
            if (c.csv) {
                out << "technique,best_score,trials,evaluations\n";
                for (const auto& run : result.runs) {
                    out << run.technique << ',' << (run.trace ? csv_number(run.trace->best_score()) : "") << ','
                        << (run.trace ? run.trace->trials.size() : 0) << ','
                        << (run.trace ? run.trace->evaluations() : 0) << '\n';
                }
            } else {
                emit(out, to_json(result, c.timing));
            }
            return 0;
        }

        if (bm->parsed()) {
            const auto corpus = load_corpus(bm_corpus, c);
            const auto registry = make_registry(c);
            BenchmarkOptions options;
            options.workflow = workflow_config(bm_w, c);
            options.regressor = parse_regression_kind(bm_regressor);
            options.ks = bm_ks;
            options.split_seeds = bm_splits;
            options.test_fraction = bm_test;
            options.top_m = bm_top_m;
            options.threshold_fraction = bm_fraction;
            const BenchmarkReport report = run_benchmark(corpus, registry, options, log);
            if (c.csv) {
                out << benchmark_csv(report, c.timing);
            } else {
                emit(out, to_json(report, options, c.timing));
            }
            return 0;
        }

        if (gn->parsed()) {
            const auto specs = synthetic_corpus(gn_count, c.seed, gn_n_min, gn_n_max);
            json entries = json::array();
            for (const auto& spec : specs) {
                const std::string name = generate_synthetic(spec).name();
                if (!gn_csv_dir.empty()) {
                    std::filesystem::create_directories(gn_csv_dir);
                    const auto path = std::filesystem::path(gn_csv_dir) / (name + ".csv");
                    const Dataset ds = generate_synthetic(spec);
                    write_dataset(Dataset(ds.points(), std::nullopt, name), path);
                    entries.push_back({{"name", name}, {"path", std::filesystem::absolute(path).string()}});
                } else {
                    entries.push_back({{"name", name},
                                       {"synthetic",
                                        {{"kind", to_string(spec.kind)},
                                         {"n", spec.n},
                                         {"d", spec.d},
                                         {"seed", spec.seed},
                                         {"params", spec.params}}}});
                }
            }
            emit(out, {{"datasets", std::move(entries)}});
            return 0;
        }
    } catch (const ExternalTechniqueError& e) {
        err << "error: " << e.what() << '\n';
        if (!e.diagnostics().empty()) err << e.diagnostics() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << app.help();
    return 1;
}

}  // namespace dradapt
