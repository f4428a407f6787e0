#include "tckae/eval.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "tckae/autoencoder.hpp"

namespace tckae::eval {

namespace {

// Shared vote/score step. keys holds, per test point, the ranking key of every
// train point (smaller = closer); exact ties break toward the lower index.
KnnResult vote_from_keys(const Matrix& keys, const std::vector<int>& train_labels, int k) {
    const int n_train = static_cast<int>(keys.cols());
    const int n_test = static_cast<int>(keys.rows());
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    if (k > n_train) throw std::invalid_argument("knn: k exceeds the training size");
    if (static_cast<int>(train_labels.size()) != n_train)
        throw std::invalid_argument("knn: label count does not match training size");

    KnnResult result;
    result.predictions.resize(static_cast<std::size_t>(n_test));
    result.scores.resize(static_cast<std::size_t>(n_test));
    std::vector<int> order(static_cast<std::size_t>(n_train));
    for (int i = 0; i < n_test; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + k, order.end(),
                          [&](int a, int b) {
                              if (keys(i, a) != keys(i, b)) return keys(i, a) < keys(i, b);
                              return a < b;
                          });
        int positives = 0;
        for (int j = 0; j < k; ++j)
            positives += train_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
        const int negatives = k - positives;
        int prediction;
        if (positives > negatives)
            prediction = 1;
        else if (positives < negatives)
            prediction = 0;
        else
            prediction = train_labels[static_cast<std::size_t>(order[0])];  // nearest breaks ties
        result.predictions[static_cast<std::size_t>(i)] = prediction;
        result.scores[static_cast<std::size_t>(i)] =
            static_cast<double>(positives) / static_cast<double>(k);
    }
    return result;
}

}  // namespace

KnnResult knn_classify(const Matrix& train_repr, const std::vector<int>& train_labels,
                       const Matrix& test_repr, int k) {
    if (train_repr.cols() != test_repr.cols())
        throw std::invalid_argument("knn: train/test dimensionality mismatch");
    Matrix sq_dist(test_repr.rows(), train_repr.rows());
    for (Eigen::Index i = 0; i < test_repr.rows(); ++i)
        for (Eigen::Index j = 0; j < train_repr.rows(); ++j)
            sq_dist(i, j) = (test_repr.row(i) - train_repr.row(j)).squaredNorm();
    return vote_from_keys(sq_dist, train_labels, k);
}

KnnResult knn_classify_similarity(const Matrix& similarity, const std::vector<int>& train_labels,
                                  int k) {
    return vote_from_keys(-similarity, train_labels, k);
}

double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted,
                int positive_label) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("f1: label vectors differ in length");
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == positive_label;
        const bool p = predicted[i] == positive_label;
        if (t && p) ++tp;
        if (!t && p) ++fp;
        if (t && !p) ++fn;
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double auc_roc(const std::vector<int>& truth, const std::vector<double>& scores) {
    if (truth.size() != scores.size())
        throw std::invalid_argument("auc: label and score vectors differ in length");
    const long n_pos = std::count(truth.begin(), truth.end(), 1);
    const long n_neg = static_cast<long>(truth.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc requires both classes in the labels");

    // Average ranks with midranks for ties.
    std::vector<std::size_t> order(truth.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(truth.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        i = j + 1;
    }
    double rank_sum = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t)
        if (truth[t] == 1) rank_sum += rank[t];
    return (rank_sum - 0.5 * static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double mse(const Matrix& x, const Matrix& reconstruction) {
    return ae::reconstruction_loss(x, reconstruction);
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

namespace {

// Largest-magnitude entry of each column made positive.
void fix_signs(Matrix& columns) {
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        Eigen::Index arg = 0;
        columns.col(c).cwiseAbs().maxCoeff(&arg);
        if (columns(arg, c) < 0.0) columns.col(c) = -columns.col(c);
    }
}

}  // namespace

Projection pca_project(const Matrix& x, int dims) {
    const auto n = x.rows();
    const auto d = x.cols();
    if (dims < 1) throw std::invalid_argument("pca: dims must be >= 1");
    if (dims > std::min<Eigen::Index>(n - 1, d))
        throw std::invalid_argument("pca: dims exceeds min(N-1, d)");

    const Matrix centered = x.rowwise() - x.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");

    Projection proj;
    proj.coordinates.resize(n, dims);
    proj.explained_variance.resize(static_cast<std::size_t>(dims));
    Matrix basis(d, dims);
    for (int c = 0; c < dims; ++c) {
        const auto src = d - 1 - c;  // eigenvalues come in ascending order
        basis.col(c) = solver.eigenvectors().col(src);
        proj.explained_variance[static_cast<std::size_t>(c)] =
            std::max(solver.eigenvalues()(src), 0.0);
    }
    fix_signs(basis);
    proj.coordinates = centered * basis;
    return proj;
}

Projection kernel_pca_project(const Matrix& kernel, int dims) {
    const auto n = kernel.rows();
    if (kernel.cols() != n) throw std::invalid_argument("kernel pca: kernel must be square");
    if (dims < 1 || dims > n - 1)
        throw std::invalid_argument("kernel pca: dims must lie in [1, N-1]");
    const double scale = std::max(1.0, kernel.cwiseAbs().maxCoeff());
    if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("kernel pca: kernel is not symmetric");

    // Double centering: Kc = H K H with H = I - 11^T / N.
    const Vector row_mean = kernel.rowwise().mean();
    const double total_mean = row_mean.mean();
    Matrix centered = kernel;
    centered.colwise() -= row_mean;
    centered.rowwise() -= row_mean.transpose();
    centered.array() += total_mean;

    const Eigen::SelfAdjointEigenSolver<Matrix> solver(centered);
    if (solver.info() != Eigen::Success)
        throw NumericError("kernel pca: eigendecomposition failed");

    Projection proj;
    proj.coordinates.resize(n, dims);
    proj.explained_variance.resize(static_cast<std::size_t>(dims));
    for (int c = 0; c < dims; ++c) {
        const auto src = n - 1 - c;
        const double eigenvalue = std::max(solver.eigenvalues()(src), 0.0);
        proj.coordinates.col(c) = solver.eigenvectors().col(src) * std::sqrt(eigenvalue);
        proj.explained_variance[static_cast<std::size_t>(c)] =
            eigenvalue / static_cast<double>(n - 1);
    }
    fix_signs(proj.coordinates);
    return proj;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for a single run.
double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<double> collect(const std::vector<RunMetrics>& runs, double RunMetrics::*field) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const RunMetrics& r : runs) v.push_back(r.*field);
    return v;
}

std::vector<double> collect_mse(const std::vector<RunMetrics>& runs) {
    std::vector<double> v;
    for (const RunMetrics& r : runs)
        if (r.mse) v.push_back(*r.mse);
    return v;
}

}  // namespace

double EvalReport::f1_mean() const { return mean_of(collect(runs, &RunMetrics::f1)); }
double EvalReport::f1_std() const { return std_of(collect(runs, &RunMetrics::f1)); }
double EvalReport::auc_mean() const { return mean_of(collect(runs, &RunMetrics::auc)); }
double EvalReport::auc_std() const { return std_of(collect(runs, &RunMetrics::auc)); }

std::optional<double> EvalReport::mse_mean() const {
    const auto v = collect_mse(runs);
    if (v.empty()) return std::nullopt;
    return mean_of(v);
}

std::optional<double> EvalReport::mse_std() const {
    const auto v = collect_mse(runs);
    if (v.empty()) return std::nullopt;
    return std_of(v);
}

std::string report_csv(const std::vector<EvalReport>& reports) {
    std::string out = "method,mse,mse_std,f1,f1_std,auc,auc_std\n";
    for (const EvalReport& r : reports) {
        out += r.method + ",";
        if (const auto m = r.mse_mean())
            out += format_double(*m) + "," + format_double(*r.mse_std()) + ",";
        else
            out += "--,--,";
        out += format_double(r.f1_mean()) + "," + format_double(r.f1_std()) + ",";
        out += format_double(r.auc_mean()) + "," + format_double(r.auc_std()) + "\n";
    }
    return out;
}

std::string report_json(const std::vector<EvalReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const EvalReport& r : reports) {
        nlohmann::json jr;
        jr["method"] = r.method;
        nlohmann::json runs = nlohmann::json::array();
        for (const RunMetrics& m : r.runs) {
            nlohmann::json jm;
            if (m.mse) jm["mse"] = *m.mse;
            jm["f1"] = m.f1;
            jm["auc"] = m.auc;
            runs.push_back(std::move(jm));
        }
        jr["runs"] = std::move(runs);
        if (const auto m = r.mse_mean()) {
            jr["mse_mean"] = *m;
            jr["mse_std"] = *r.mse_std();
        }
        jr["f1_mean"] = r.f1_mean();
        jr["f1_std"] = r.f1_std();
        jr["auc_mean"] = r.auc_mean();
        jr["auc_std"] = r.auc_std();
        j.push_back(std::move(jr));
    }
    return j.dump(1) + "\n";
}

}  // namespace tckae::eval
