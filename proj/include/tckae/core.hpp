#ifndef TCKAE_CORE_HPP
#define TCKAE_CORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tckae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Malformed or inconsistent input data / file content.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Optimization or linear-algebra failure (divergence, non-finite values).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// TimeSeriesDataset: N multivariate time series on a fixed T x V grid with a
// binary observation mask. Unobserved cells hold NaN internally and are never
// read by any arithmetic path; all computation branches on the mask.
// ---------------------------------------------------------------------------
class TimeSeriesDataset {
public:
    TimeSeriesDataset() = default;

    /// All cells start unobserved.
    TimeSeriesDataset(int n, int t, int v);

    int num_series() const { return n_; }
    int num_steps() const { return t_; }
    int num_variables() const { return v_; }

    double value(int i, int t, int v) const { return values_[index(i, t, v)]; }
    bool observed(int i, int t, int v) const { return mask_[index(i, t, v)] != 0; }

    /// Marks the cell observed.
    void set_value(int i, int t, int v, double x) {
        values_[index(i, t, v)] = x;
        mask_[index(i, t, v)] = 1;
    }

    /// Overwrites a cell without touching the mask (imputation path).
    void fill_value(int i, int t, int v, double x) { values_[index(i, t, v)] = x; }

    void set_missing(int i, int t, int v) {
        values_[index(i, t, v)] = std::numeric_limits<double>::quiet_NaN();
        mask_[index(i, t, v)] = 0;
    }

    int observed_count(int i) const;

    /// Checks shape consistency, binary labels, and the >= 2 observations
    /// per series rule. Throws DataError on violation.
    void validate() const;

    std::optional<std::vector<int>> labels;
    std::vector<std::string> variable_names;

private:
    std::size_t index(int i, int t, int v) const {
        return (static_cast<std::size_t>(i) * static_cast<std::size_t>(t_) +
                static_cast<std::size_t>(t)) *
                   static_cast<std::size_t>(v_) +
               static_cast<std::size_t>(v);
    }

    int n_ = 0, t_ = 0, v_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

// ---------------------------------------------------------------------------
// Imputation
// ---------------------------------------------------------------------------
enum class Imputation { Zero, Mean, Locf };

struct ImputationMethod {
    Imputation tag = Imputation::Zero;
    // Per-variable training means; required (and only used) for Mean.
    std::vector<double> means;

    static ImputationMethod zero() { return {Imputation::Zero, {}}; }
    static ImputationMethod locf() { return {Imputation::Locf, {}}; }
    /// Mean statistics from observed training cells only.
    static ImputationMethod mean_from(const TimeSeriesDataset& train);
};

ImputationMethod parse_imputation(const std::string& name, const TimeSeriesDataset& train);
std::string imputation_name(Imputation tag);

/// Fills every unobserved cell; observed cells and the mask are untouched.
TimeSeriesDataset impute(const TimeSeriesDataset& ds, const ImputationMethod& method);

// ---------------------------------------------------------------------------
// Standardization (z-score per variable over observed training cells)
// ---------------------------------------------------------------------------
struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // zero-variance variables are clamped to 1
};

StandardizationStats compute_standardization(const TimeSeriesDataset& train);
TimeSeriesDataset apply_standardization(const TimeSeriesDataset& ds,
                                        const StandardizationStats& stats);
std::pair<TimeSeriesDataset, StandardizationStats> standardize(
    const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to);

// ---------------------------------------------------------------------------
// Flattening and splitting
// ---------------------------------------------------------------------------

/// Row i holds series i in time-major order (index t*V + v). Requires a fully
/// imputed dataset.
Matrix flatten(const TimeSeriesDataset& ds);

/// Inverse of flatten; the result is fully observed.
TimeSeriesDataset unflatten(const Matrix& flat, int t, int v);

/// First floor(N * fraction) series become the training set; order preserved.
std::pair<TimeSeriesDataset, TimeSeriesDataset> split_train_test(
    const TimeSeriesDataset& ds, double train_fraction);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

// Dataset CSV: header "N,T,V,has_labels", then N blocks of T lines of V
// comma-separated numbers with NaN for missing, then (if has_labels) one line
// of N labels in {0,1}.
TimeSeriesDataset load_dataset(const std::string& path);
void save_dataset(const TimeSeriesDataset& ds, const std::string& path);

// Matrix CSV: one-line "rows,cols" header, then the entries row by row.
Matrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const Matrix& m, const std::string& path);

/// Shortest round-trippable decimal representation.
std::string format_double(double x);

/// Write-temp-then-rename so partially written files are never observed.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace tckae

#endif  // TCKAE_CORE_HPP
