#include "tckae/cli.hpp"

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tckae/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tckae::cli {

namespace {

std::string substitute_run(const std::string& pattern, int run) {
    std::string out = pattern;
    const std::string token = "{run}";
    std::size_t pos = 0;
    while ((pos = out.find(token, pos)) != std::string::npos) {
        out.replace(pos, token.size(), std::to_string(run));
        pos += 1;
    }
    return out;
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

TimeSeriesDataset concat_datasets(const TimeSeriesDataset& a, const TimeSeriesDataset& b) {
    if (a.num_steps() != b.num_steps() || a.num_variables() != b.num_variables())
        throw std::invalid_argument("cannot concatenate datasets of different shape");
    TimeSeriesDataset out(a.num_series() + b.num_series(), a.num_steps(), a.num_variables());
    for (int i = 0; i < a.num_series() + b.num_series(); ++i) {
        const TimeSeriesDataset& src = i < a.num_series() ? a : b;
        const int j = i < a.num_series() ? i : i - a.num_series();
        for (int t = 0; t < out.num_steps(); ++t)
            for (int v = 0; v < out.num_variables(); ++v)
                if (src.observed(j, t, v)) out.set_value(i, t, v, src.value(j, t, v));
    }
    return out;
}

std::vector<int> make_layer_sizes(int d_in, const std::vector<int>& arch) {
    if (arch.empty()) throw std::invalid_argument("architecture must list at least the code size");
    for (const int h : arch)
        if (h < 1) throw std::invalid_argument("architecture sizes must be positive");
    std::vector<int> sizes;
    sizes.push_back(d_in);
    for (const int h : arch) sizes.push_back(h);
    for (auto it = arch.rbegin() + 1; it != arch.rend(); ++it) sizes.push_back(*it);
    sizes.push_back(d_in);
    return sizes;
}

struct SplitData {
    TimeSeriesDataset train_std, test_std;  // standardized, not imputed
    StandardizationStats stats;
};

SplitData load_and_standardize(const std::string& data_path, double train_fraction) {
    const TimeSeriesDataset ds = load_dataset(data_path);
    auto [train_raw, test_raw] = split_train_test(ds, train_fraction);
    SplitData out;
    out.stats = compute_standardization(train_raw);
    out.train_std = apply_standardization(train_raw, out.stats);
    out.test_std = apply_standardization(test_raw, out.stats);
    return out;
}

std::vector<int> require_labels(const TimeSeriesDataset& ds, const std::string& what) {
    if (!ds.labels) throw DataError(what + " has no labels");
    return *ds.labels;
}

double read_test_mse(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
        return j.at("test_mse").get<double>();
    } catch (const json::exception& e) {
        throw DataError("cannot read test_mse from '" + path + "': " + e.what());
    }
}

eval::EvalReport evaluate_codes_runs(const std::string& method,
                                     const std::vector<int>& train_labels,
                                     const std::vector<int>& test_labels,
                                     const std::string& train_codes_pat,
                                     const std::string& test_codes_pat,
                                     const std::string& metrics_pat, int k, int runs) {
    eval::EvalReport report;
    report.method = method;
    for (int r = 0; r < runs; ++r) {
        const Matrix train_codes = load_matrix_csv(substitute_run(train_codes_pat, r));
        const Matrix test_codes = load_matrix_csv(substitute_run(test_codes_pat, r));
        const auto knn = eval::knn_classify(train_codes, train_labels, test_codes, k);
        eval::RunMetrics m;
        m.f1 = eval::f1_score(test_labels, knn.predictions);
        m.auc = eval::auc_roc(test_labels, knn.scores);
        if (!metrics_pat.empty()) m.mse = read_test_mse(substitute_run(metrics_pat, r));
        report.runs.push_back(m);
    }
    return report;
}

eval::EvalReport evaluate_tck_runs(const std::string& method,
                                   const std::vector<int>& train_labels,
                                   const std::vector<int>& test_labels,
                                   const std::string& kernel_pat, int k, int runs) {
    eval::EvalReport report;
    report.method = method;
    for (int r = 0; r < runs; ++r) {
        const Matrix similarity = load_matrix_csv(substitute_run(kernel_pat, r));
        if (similarity.rows() != static_cast<Eigen::Index>(test_labels.size()) ||
            similarity.cols() != static_cast<Eigen::Index>(train_labels.size()))
            throw DataError("similarity matrix shape does not match the test x train split");
        const auto knn = eval::knn_classify_similarity(similarity, train_labels, k);
        eval::RunMetrics m;
        m.f1 = eval::f1_score(test_labels, knn.predictions);
        m.auc = eval::auc_roc(test_labels, knn.scores);
        report.runs.push_back(m);
    }
    return report;
}

void write_projection_csv(const eval::Projection& proj, const std::vector<int>& labels,
                          const std::string& path) {
    if (proj.coordinates.rows() != static_cast<Eigen::Index>(labels.size()))
        throw DataError("projection rows do not match label count");
    std::string out = std::to_string(proj.coordinates.rows()) + "," +
                      std::to_string(proj.coordinates.cols() + 1) + "\n";
    for (Eigen::Index i = 0; i < proj.coordinates.rows(); ++i) {
        for (Eigen::Index c = 0; c < proj.coordinates.cols(); ++c)
            out += format_double(proj.coordinates(i, c)) + ",";
        out += std::to_string(labels[static_cast<std::size_t>(i)]) + "\n";
    }
    write_file_atomic(path, out);
}

}  // namespace

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void run_synth(const SynthOpts& opts) {
    if (opts.out.empty()) throw std::invalid_argument("synth: --out is required");
    const TimeSeriesDataset ds = synth::generate(opts.config);
    save_dataset(ds, opts.out);
    std::cout << "wrote " << opts.out << " (" << ds.num_series() << " series, "
              << ds.num_steps() << "x" << ds.num_variables() << ")\n";
}

void run_tck(const TckOpts& opts) {
    ensure_dir(opts.out_dir);
    const SplitData split = load_and_standardize(opts.data, opts.train_fraction);

    tck::TckModel model;
    if (opts.transductive) {
        const TimeSeriesDataset all = concat_datasets(split.train_std, split.test_std);
        model = tck::fit_tck(all, opts.config, split.stats);
    } else {
        model = tck::fit_tck(split.train_std, opts.config, split.stats);
    }
    tck::save_model(model, join(opts.out_dir, "model.json"));

    save_matrix_csv(tck::kernel_matrix(model, split.train_std, split.train_std),
                    join(opts.out_dir, "K_train.csv"));
    save_matrix_csv(tck::kernel_matrix(model, split.test_std, split.train_std),
                    join(opts.out_dir, "K_test_train.csv"));
    save_matrix_csv(tck::kernel_matrix(model, split.test_std, split.test_std),
                    join(opts.out_dir, "K_test.csv"));
    std::cout << "wrote " << join(opts.out_dir, "model.json") << " and kernel matrices ("
              << model.members.size() << " members)\n";
}

void run_train(const TrainOpts& opts) {
    ensure_dir(opts.out_dir);
    const SplitData split = load_and_standardize(opts.data, opts.train_fraction);

    const ImputationMethod method = parse_imputation(opts.imputation, split.train_std);
    const Matrix x_train = flatten(impute(split.train_std, method));
    const Matrix x_test = flatten(impute(split.test_std, method));

    Matrix kernel;
    const bool use_kernel = opts.config.lambda > 0.0;
    if (use_kernel) {
        if (opts.kernel.empty())
            throw std::invalid_argument("train: --kernel is required when lambda > 0");
        kernel = load_matrix_csv(opts.kernel);
        if (kernel.rows() != x_train.rows() || kernel.cols() != x_train.rows())
            throw DataError("prior kernel shape does not match the training split");
    }

    const auto layer_sizes = make_layer_sizes(static_cast<int>(x_train.cols()), opts.arch);
    const ae::Autoencoder net = ae::init_network(layer_sizes, opts.config.seed);
    const auto [model, history] =
        ae::train(net, x_train, use_kernel ? &kernel : nullptr, opts.config, &x_test);

    ae::save_checkpoint(model, opts.config, join(opts.out_dir, "checkpoint.json"));
    save_matrix_csv(ae::encode(model, x_train), join(opts.out_dir, "codes_train.csv"));
    save_matrix_csv(ae::encode(model, x_test), join(opts.out_dir, "codes_test.csv"));

    std::string hist = "epoch,total_loss,recon_loss,code_loss\n";
    for (std::size_t e = 0; e < history.total_loss.size(); ++e)
        hist += std::to_string(e) + "," + format_double(history.total_loss[e]) + "," +
                format_double(history.recon_loss[e]) + "," + format_double(history.code_loss[e]) +
                "\n";
    write_file_atomic(join(opts.out_dir, "history.csv"), hist);

    json metrics;
    metrics["imputation"] = opts.imputation;
    metrics["lambda"] = opts.config.lambda;
    metrics["test_mse"] = history.holdout_recon.value();
    if (!history.total_loss.empty()) {
        metrics["initial_train_loss"] = history.total_loss.front();
        metrics["final_train_loss"] = history.total_loss.back();
    }
    write_file_atomic(join(opts.out_dir, "metrics.json"), metrics.dump(1) + "\n");
    std::cout << "wrote " << join(opts.out_dir, "checkpoint.json")
              << " (test mse " << format_double(history.holdout_recon.value()) << ")\n";
}

void run_eval(const EvalOpts& opts) {
    const TimeSeriesDataset ds = load_dataset(opts.data);
    require_labels(ds, "dataset '" + opts.data + "'");
    auto [train_raw, test_raw] = split_train_test(ds, opts.train_fraction);
    const std::vector<int> train_labels = *train_raw.labels;
    const std::vector<int> test_labels = *test_raw.labels;
    if (opts.runs < 1) throw std::invalid_argument("eval: --runs must be >= 1");

    eval::EvalReport report;
    if (opts.mode == "codes") {
        if (opts.train_codes.empty() || opts.test_codes.empty())
            throw std::invalid_argument("eval: codes mode requires --train-codes and --test-codes");
        report = evaluate_codes_runs(opts.method.empty() ? "codes" : opts.method, train_labels,
                                     test_labels, opts.train_codes, opts.test_codes, opts.metrics,
                                     opts.k, opts.runs);
    } else if (opts.mode == "tck") {
        if (opts.kernel.empty()) throw std::invalid_argument("eval: tck mode requires --kernel");
        report = evaluate_tck_runs(opts.method.empty() ? "TCK-i" : opts.method, train_labels,
                                   test_labels, opts.kernel, opts.k, opts.runs);
    } else {
        throw std::invalid_argument("eval: unknown mode '" + opts.mode + "'");
    }

    const std::vector<eval::EvalReport> reports{report};
    const std::string csv = eval::report_csv(reports);
    if (!opts.out_csv.empty()) write_file_atomic(opts.out_csv, csv);
    if (!opts.out_json.empty()) write_file_atomic(opts.out_json, eval::report_json(reports));
    std::cout << csv;
}

void run_project(const ProjectOpts& opts) {
    if (opts.out.empty()) throw std::invalid_argument("project: --out is required");
    const Matrix input = load_matrix_csv(opts.input);
    eval::Projection proj;
    if (opts.mode == "pca")
        proj = eval::pca_project(input, opts.dims);
    else if (opts.mode == "kpca")
        proj = eval::kernel_pca_project(input, opts.dims);
    else
        throw std::invalid_argument("project: unknown mode '" + opts.mode + "'");

    const TimeSeriesDataset ds = load_dataset(opts.data);
    const std::vector<int> all_labels = require_labels(ds, "dataset '" + opts.data + "'");
    std::vector<int> labels;
    if (input.rows() == ds.num_series()) {
        labels = all_labels;
    } else {
        auto [train_raw, test_raw] = split_train_test(ds, opts.train_fraction);
        if (input.rows() == test_raw.num_series())
            labels = *test_raw.labels;
        else if (input.rows() == train_raw.num_series())
            labels = *train_raw.labels;
        else
            throw DataError("projection input rows match neither the dataset nor a split side");
    }
    write_projection_csv(proj, labels, opts.out);
    std::cout << "wrote " << opts.out;
    for (std::size_t c = 0; c < proj.explained_variance.size(); ++c)
        std::cout << (c == 0 ? " (explained variance " : ", ")
                  << format_double(proj.explained_variance[c]);
    std::cout << ")\n";
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

namespace {

struct PipelineConfig {
    synth::SynthConfig synth;
    double train_fraction = 0.8;
    tck::TckConfig tck;
    bool transductive = false;
    double lambda = 0.5;
    int epochs = 500;
    int batch_size = 32;
    double learning_rate = 1e-3;
    std::vector<int> arch = {64, 32};
    int k = 3;
    int runs = 10;
    std::uint64_t seed = 42;
};

PipelineConfig parse_pipeline_config(const std::string& path) {
    PipelineConfig cfg;
    if (path.empty()) return cfg;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError("cannot parse pipeline config '" + path + "': " + e.what());
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n") cfg.synth.n = value.get<int>();
            else if (key == "t") cfg.synth.t = value.get<int>();
            else if (key == "v") cfg.synth.v = value.get<int>();
            else if (key == "class_balance") cfg.synth.class_balance = value.get<double>();
            else if (key == "separation") cfg.synth.separation = value.get<double>();
            else if (key == "missing_rate") cfg.synth.missing_rate = value.get<double>();
            else if (key == "informative_missingness")
                cfg.synth.informative_missingness = value.get<double>();
            else if (key == "noise_std") cfg.synth.noise_std = value.get<double>();
            else if (key == "train_fraction") cfg.train_fraction = value.get<double>();
            else if (key == "components") cfg.tck.max_components = value.get<int>();
            else if (key == "realizations") cfg.tck.realizations = value.get<int>();
            else if (key == "min_segment_length") cfg.tck.min_segment_length = value.get<int>();
            else if (key == "max_segment_length") cfg.tck.max_segment_length = value.get<int>();
            else if (key == "min_attributes") cfg.tck.min_attributes = value.get<int>();
            else if (key == "subsample_fraction") cfg.tck.subsample_fraction = value.get<double>();
            else if (key == "em_max_iters") cfg.tck.em_max_iters = value.get<int>();
            else if (key == "em_tol") cfg.tck.em_tol = value.get<double>();
            else if (key == "threads") cfg.tck.threads = value.get<int>();
            else if (key == "transductive") cfg.transductive = value.get<bool>();
            else if (key == "lambda") cfg.lambda = value.get<double>();
            else if (key == "epochs") cfg.epochs = value.get<int>();
            else if (key == "batch_size") cfg.batch_size = value.get<int>();
            else if (key == "learning_rate") cfg.learning_rate = value.get<double>();
            else if (key == "arch") cfg.arch = value.get<std::vector<int>>();
            else if (key == "k") cfg.k = value.get<int>();
            else if (key == "runs") cfg.runs = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else
                throw DataError("unknown pipeline config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw DataError("invalid pipeline config '" + path + "': " + e.what());
    }
    return cfg;
}

template <typename Fn>
void pipeline_stage(const std::string& name, Fn&& fn) {
    try {
        fn();
    } catch (const DataError& e) {
        throw DataError("pipeline stage '" + name + "' failed: " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("pipeline stage '" + name + "' failed: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("pipeline stage '" + name + "' failed: " + e.what());
    }
}

}  // namespace

void run_pipeline(const PipelineOpts& opts) {
    PipelineConfig cfg = parse_pipeline_config(opts.config);
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.runs > 0) cfg.runs = opts.runs;
    if (cfg.runs < 1) throw std::invalid_argument("pipeline: runs must be >= 1");
    ensure_dir(opts.out_dir);

    // Seed derivation: synth gets stream 1, the TCK fit of run r gets stream
    // 100 + r, the autoencoder of (run r, imputation i) gets stream
    // 1000 + 16*r + i (shared by the plain and the kernel-aligned model so
    // they start from identical weights).
    std::string data_path = opts.data;
    if (data_path.empty()) {
        data_path = join(opts.out_dir, "data.csv");
        pipeline_stage("synth", [&] {
            synth::SynthConfig scfg = cfg.synth;
            scfg.seed = derive_seed(cfg.seed, 1);
            save_dataset(synth::generate(scfg), data_path);
        });
    }

    const TimeSeriesDataset ds = load_dataset(data_path);
    require_labels(ds, "pipeline dataset");
    auto [train_raw, test_raw] = split_train_test(ds, cfg.train_fraction);
    const std::vector<int> train_labels = *train_raw.labels;
    const std::vector<int> test_labels = *test_raw.labels;

    const std::vector<std::string> imputations = {"zero", "mean", "locf"};
    const std::vector<std::string> suffixes = {"z", "m", "l"};

    for (int r = 0; r < cfg.runs; ++r) {
        const std::string run_dir = join(opts.out_dir, "run_" + std::to_string(r));
        pipeline_stage("tck (run " + std::to_string(r) + ")", [&] {
            TckOpts topts;
            topts.data = data_path;
            topts.train_fraction = cfg.train_fraction;
            topts.config = cfg.tck;
            topts.config.master_seed = derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(r));
            topts.transductive = cfg.transductive;
            topts.out_dir = run_dir;
            run_tck(topts);
        });

        for (std::size_t imp = 0; imp < imputations.size(); ++imp) {
            for (const bool kernelized : {false, true}) {
                const std::string name =
                    std::string(kernelized ? "dkae" : "ae") + "_" + imputations[imp];
                pipeline_stage(name + " (run " + std::to_string(r) + ")", [&] {
                    TrainOpts topts;
                    topts.data = data_path;
                    topts.train_fraction = cfg.train_fraction;
                    topts.imputation = imputations[imp];
                    topts.arch = cfg.arch;
                    topts.config.lambda = kernelized ? cfg.lambda : 0.0;
                    topts.config.epochs = cfg.epochs;
                    topts.config.batch_size = cfg.batch_size;
                    topts.config.learning_rate = cfg.learning_rate;
                    topts.config.seed = derive_seed(
                        cfg.seed, 1000 + 16 * static_cast<std::uint64_t>(r) + imp);
                    topts.kernel = kernelized ? join(run_dir, "K_train.csv") : "";
                    topts.out_dir = join(run_dir, name);
                    run_train(topts);
                });
            }
        }
    }

    // Aggregate the Table-shaped report: AE/dkAE per imputation, then TCK-i.
    std::vector<eval::EvalReport> reports;
    pipeline_stage("eval", [&] {
        for (std::size_t imp = 0; imp < imputations.size(); ++imp) {
            for (const bool kernelized : {false, true}) {
                const std::string dir_name =
                    std::string(kernelized ? "dkae" : "ae") + "_" + imputations[imp];
                const std::string base = join(join(opts.out_dir, "run_{run}"), dir_name);
                const std::string method =
                    std::string(kernelized ? "dkAE-" : "AE-") + suffixes[imp];
                reports.push_back(evaluate_codes_runs(
                    method, train_labels, test_labels, join(base, "codes_train.csv"),
                    join(base, "codes_test.csv"), join(base, "metrics.json"), cfg.k, cfg.runs));
            }
        }
        reports.push_back(evaluate_tck_runs(
            "TCK-i", train_labels, test_labels,
            join(join(opts.out_dir, "run_{run}"), "K_test_train.csv"), cfg.k, cfg.runs));
    });

    // Optional extra dkAE rows over a lambda sweep (zero imputation).
    for (const double lam : opts.lambda_sweep) {
        const std::string name = "dkae_zero_l" + format_double(lam);
        pipeline_stage(name, [&] {
            for (int r = 0; r < cfg.runs; ++r) {
                const std::string run_dir = join(opts.out_dir, "run_" + std::to_string(r));
                TrainOpts topts;
                topts.data = data_path;
                topts.train_fraction = cfg.train_fraction;
                topts.imputation = "zero";
                topts.arch = cfg.arch;
                topts.config.lambda = lam;
                topts.config.epochs = cfg.epochs;
                topts.config.batch_size = cfg.batch_size;
                topts.config.learning_rate = cfg.learning_rate;
                topts.config.seed = derive_seed(cfg.seed, 1000 + 16 * static_cast<std::uint64_t>(r));
                topts.kernel = join(run_dir, "K_train.csv");
                topts.out_dir = join(run_dir, name);
                run_train(topts);
            }
            const std::string base = join(join(opts.out_dir, "run_{run}"), name);
            reports.push_back(evaluate_codes_runs(
                "dkAE-z(lambda=" + format_double(lam) + ")", train_labels, test_labels,
                join(base, "codes_train.csv"), join(base, "codes_test.csv"),
                join(base, "metrics.json"), cfg.k, cfg.runs));
        });
    }

    // Projections of the test set from run 0, mirroring the three panels:
    // kernel PCA on the TCK kernel, PCA on plain-AE codes, PCA on dkAE codes.
    pipeline_stage("project", [&] {
        const std::string run0 = join(opts.out_dir, "run_0");
        const std::string proj_dir = join(opts.out_dir, "projections");
        ensure_dir(proj_dir);
        write_projection_csv(
            eval::kernel_pca_project(load_matrix_csv(join(run0, "K_test.csv")), 2), test_labels,
            join(proj_dir, "kpca_input.csv"));
        write_projection_csv(
            eval::pca_project(load_matrix_csv(join(join(run0, "ae_zero"), "codes_test.csv")), 2),
            test_labels, join(proj_dir, "pca_ae_z.csv"));
        write_projection_csv(
            eval::pca_project(load_matrix_csv(join(join(run0, "dkae_zero"), "codes_test.csv")), 2),
            test_labels, join(proj_dir, "pca_dkae_z.csv"));
    });

    const std::string csv = eval::report_csv(reports);
    write_file_atomic(join(opts.out_dir, "report.csv"), csv);
    write_file_atomic(join(opts.out_dir, "report.json"), eval::report_json(reports));
    std::cout << csv;
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Time series cluster kernel and kernel-aligned autoencoder toolkit"};
    app.require_subcommand(1);

    SynthOpts synth_opts;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
    synth_cmd->add_option("--n", synth_opts.config.n, "Number of series");
    synth_cmd->add_option("--t", synth_opts.config.t, "Time steps per series");
    synth_cmd->add_option("--v", synth_opts.config.v, "Variables per series");
    synth_cmd->add_option("--class-balance", synth_opts.config.class_balance,
                          "Fraction of label-1 series");
    synth_cmd->add_option("--separation", synth_opts.config.separation,
                          "Class separation of the dynamics");
    synth_cmd->add_option("--missing", synth_opts.config.missing_rate, "Missing-cell rate");
    synth_cmd->add_option("--informative", synth_opts.config.informative_missingness,
                          "Class dependence of the missing rates");
    synth_cmd->add_option("--noise", synth_opts.config.noise_std, "Noise standard deviation");
    synth_cmd->add_option("--seed", synth_opts.config.seed, "Random seed");
    synth_cmd->add_option("-o,--out", synth_opts.out, "Output dataset CSV")->required();

    TckOpts tck_opts;
    auto* tck_cmd = app.add_subcommand("tck", "Fit the cluster-kernel ensemble, emit kernels");
    tck_cmd->add_option("--data", tck_opts.data, "Dataset CSV")->required();
    tck_cmd->add_option("--train-frac", tck_opts.train_fraction, "Training fraction");
    tck_cmd->add_option("--components", tck_opts.config.max_components,
                        "Largest mixture size (ensemble uses 2..C)");
    tck_cmd->add_option("--realizations", tck_opts.config.realizations,
                        "Members per mixture size");
    tck_cmd->add_option("--min-seg", tck_opts.config.min_segment_length,
                        "Minimum segment length (0: min(6,T))");
    tck_cmd->add_option("--max-seg", tck_opts.config.max_segment_length,
                        "Maximum segment length (0: T)");
    tck_cmd->add_option("--min-attrs", tck_opts.config.min_attributes,
                        "Minimum attribute-subset size");
    tck_cmd->add_option("--subsample", tck_opts.config.subsample_fraction,
                        "Training subsample fraction per member");
    tck_cmd->add_option("--em-iters", tck_opts.config.em_max_iters, "Max EM iterations");
    tck_cmd->add_option("--em-tol", tck_opts.config.em_tol, "EM objective tolerance");
    tck_cmd->add_option("--a0-min", tck_opts.config.a0_min, "Mean-prior strength: lower bound");
    tck_cmd->add_option("--a0-max", tck_opts.config.a0_max, "Mean-prior strength: upper bound");
    tck_cmd->add_option("--b0-min", tck_opts.config.b0_min, "Variance shrinkage: lower bound");
    tck_cmd->add_option("--b0-max", tck_opts.config.b0_max, "Variance shrinkage: upper bound");
    tck_cmd->add_option("--n0-min", tck_opts.config.n0_min, "Smoothing width: lower bound");
    tck_cmd->add_option("--n0-max", tck_opts.config.n0_max, "Smoothing width: upper bound");
    tck_cmd->add_option("--seed", tck_opts.config.master_seed, "Master seed");
    tck_cmd->add_option("--threads", tck_opts.config.threads, "Member-fit threads");
    tck_cmd->add_flag("--transductive", tck_opts.transductive,
                      "Fit members on train+test instead of train only");
    tck_cmd->add_option("-o,--out-dir", tck_opts.out_dir, "Output directory");

    TrainOpts train_opts;
    auto* train_cmd = app.add_subcommand("train", "Train an autoencoder (kernel-aligned if lambda > 0)");
    train_cmd->add_option("--data", train_opts.data, "Dataset CSV")->required();
    train_cmd->add_option("--train-frac", train_opts.train_fraction, "Training fraction");
    train_cmd->add_option("--impute", train_opts.imputation, "Imputation: zero|mean|locf");
    train_cmd->add_option("--lambda", train_opts.config.lambda, "Code-loss weight in [0,1]");
    train_cmd->add_option("--kernel", train_opts.kernel, "Prior kernel CSV (train x train)");
    train_cmd->add_option("--arch", train_opts.arch, "Encoder sizes, e.g. 64,32 (last = code)")
        ->delimiter(',');
    train_cmd->add_option("--epochs", train_opts.config.epochs, "Training epochs");
    train_cmd->add_option("--batch", train_opts.config.batch_size, "Mini-batch size");
    train_cmd->add_option("--lr", train_opts.config.learning_rate, "Learning rate");
    train_cmd->add_option("--seed", train_opts.config.seed, "Init/shuffle seed");
    train_cmd->add_option("-o,--out-dir", train_opts.out_dir, "Output directory");

    EvalOpts eval_opts;
    auto* eval_cmd = app.add_subcommand("eval", "kNN classification report (F1, AUC, MSE)");
    eval_cmd->add_option("--mode", eval_opts.mode, "codes | tck");
    eval_cmd->add_option("--data", eval_opts.data, "Dataset CSV with labels")->required();
    eval_cmd->add_option("--train-frac", eval_opts.train_fraction, "Training fraction");
    eval_cmd->add_option("--train-codes", eval_opts.train_codes,
                         "Train codes CSV ({run} substituted)");
    eval_cmd->add_option("--test-codes", eval_opts.test_codes,
                         "Test codes CSV ({run} substituted)");
    eval_cmd->add_option("--metrics", eval_opts.metrics,
                         "metrics.json pattern supplying test_mse");
    eval_cmd->add_option("--kernel", eval_opts.kernel,
                         "Test x train similarity CSV pattern (tck mode)");
    eval_cmd->add_option("--k", eval_opts.k, "Neighbors");
    eval_cmd->add_option("--runs", eval_opts.runs, "Number of runs to aggregate");
    eval_cmd->add_option("--method", eval_opts.method, "Report row name");
    eval_cmd->add_option("--out-json", eval_opts.out_json, "Report JSON path");
    eval_cmd->add_option("--out-csv", eval_opts.out_csv, "Report CSV path");

    ProjectOpts project_opts;
    auto* project_cmd = app.add_subcommand("project", "2-D PCA / kernel-PCA coordinates");
    project_cmd->add_option("--mode", project_opts.mode, "pca | kpca");
    project_cmd->add_option("--input", project_opts.input, "Codes or kernel CSV")->required();
    project_cmd->add_option("--data", project_opts.data, "Dataset CSV providing labels")
        ->required();
    project_cmd->add_option("--train-frac", project_opts.train_fraction, "Training fraction");
    project_cmd->add_option("--dims", project_opts.dims, "Components");
    project_cmd->add_option("-o,--out", project_opts.out, "Output CSV")->required();

    PipelineOpts pipeline_opts;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "Full experiment: synth -> tck -> 6 trainings + TCK-i -> report");
    pipeline_cmd->add_option("--config", pipeline_opts.config, "Flat JSON config file");
    pipeline_cmd->add_option("--data", pipeline_opts.data,
                             "Existing dataset CSV (skips synthesis)");
    pipeline_cmd->add_option("-o,--out-dir", pipeline_opts.out_dir, "Experiment directory");
    pipeline_cmd->add_option("--seed", pipeline_opts.seed, "Master seed override");
    pipeline_cmd->add_option("--runs", pipeline_opts.runs, "Run count override");
    pipeline_cmd->add_option("--lambda-sweep", pipeline_opts.lambda_sweep,
                             "Extra dkAE-z rows at these lambda values")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) run_synth(synth_opts);
        else if (tck_cmd->parsed()) run_tck(tck_opts);
        else if (train_cmd->parsed()) run_train(train_opts);
        else if (eval_cmd->parsed()) run_eval(eval_opts);
        else if (project_cmd->parsed()) run_project(project_opts);
        else if (pipeline_cmd->parsed()) run_pipeline(pipeline_opts);
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("tckae");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tckae::cli
