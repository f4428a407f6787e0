#ifndef TCKAE_EVAL_HPP
#define TCKAE_EVAL_HPP

#include <optional>
#include <string>
#include <vector>

#include "tckae/core.hpp"

namespace tckae::eval {

struct KnnResult {
    std::vector<int> predictions;
    std::vector<double> scores;  // fraction of positive labels among the k neighbors
};

/// kNN with Euclidean distance on row vectors. Distance ties break toward the
/// lower train index; vote ties toward the nearest neighbor's label.
KnnResult knn_classify(const Matrix& train_repr, const std::vector<int>& train_labels,
                       const Matrix& test_repr, int k);

/// kNN on a precomputed test x train similarity matrix (higher = closer).
KnnResult knn_classify_similarity(const Matrix& similarity, const std::vector<int>& train_labels,
                                  int k);

double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted,
                int positive_label = 1);

/// Mann-Whitney formulation; ties count 0.5. Requires both classes present.
double auc_roc(const std::vector<int>& truth, const std::vector<double>& scores);

/// Identical to the autoencoder reconstruction loss (shared definition).
double mse(const Matrix& x, const Matrix& reconstruction);

struct Projection {
    Matrix coordinates;                      // N x dims
    std::vector<double> explained_variance;  // non-negative, non-increasing
};

/// Linear PCA: center, project on the top eigenvectors of the covariance.
/// Sign convention: the largest-magnitude loading of each component is
/// positive.
Projection pca_project(const Matrix& x, int dims = 2);

/// Kernel PCA: double-center the (symmetric PSD) kernel, eigendecompose,
/// scale eigenvectors by sqrt(eigenvalue); tiny negative eigenvalues clamp
/// to 0.
Projection kernel_pca_project(const Matrix& kernel, int dims = 2);

struct RunMetrics {
    std::optional<double> mse;
    double f1 = 0.0;
    double auc = 0.0;
};

struct EvalReport {
    std::string method;
    std::vector<RunMetrics> runs;

    double f1_mean() const;
    double f1_std() const;
    double auc_mean() const;
    double auc_std() const;
    /// Empty when no run carries an MSE.
    std::optional<double> mse_mean() const;
    std::optional<double> mse_std() const;
};

/// Table-shaped CSV: method,mse,mse_std,f1,f1_std,auc,auc_std with "--" for
/// absent MSE.
std::string report_csv(const std::vector<EvalReport>& reports);
std::string report_json(const std::vector<EvalReport>& reports);

}  // namespace tckae::eval

#endif  // TCKAE_EVAL_HPP
