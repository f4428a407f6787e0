#ifndef TCKAE_TCK_HPP
#define TCKAE_TCK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tckae/core.hpp"

namespace tckae::tck {

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------
struct TckConfig {
    int max_components = 10;    // ensemble uses G = 2..max_components
    int realizations = 10;      // members per component count
    int min_segment_length = 6;  // clamped to T when T is shorter
    int max_segment_length = 0;  // 0: up to T
    int min_attributes = 2;
    double subsample_fraction = 0.8;
    double a0_min = 0.1, a0_max = 1.0;    // mean-prior precision scale
    double b0_min = 0.1, b0_max = 1.0;    // variance shrinkage strength
    double n0_min = 0.05, n0_max = 0.2;   // temporal smoothing width (fraction of segment)
    int em_max_iters = 20;
    double em_tol = 1e-5;
    std::uint64_t master_seed = 0;
    int threads = 1;

    int member_count() const { return (max_components - 1) * realizations; }
    void validate(int T, int V) const;
};

// One ensemble partition: which slice of the data it sees, how many mixture
// components it fits, and the prior hyperparameters drawn for it.
struct MemberSpec {
    int components = 2;                // G
    int seg_begin = 0, seg_end = 0;    // time segment [begin, end)
    std::vector<int> attributes;       // ascending variable indices
    double a0 = 0.5, b0 = 0.5, n0 = 0.1;
    std::vector<int> subsample;        // training series this member fits on
    std::uint64_t seed = 0;
    int em_max_iters = 20;
    double em_tol = 1e-5;

    int segment_length() const { return seg_end - seg_begin; }
    int attribute_count() const { return static_cast<int>(attributes.size()); }
};

// A fitted diagonal-covariance Gaussian mixture over the member's view.
// means/variances are (segment_length x attribute_count) per component.
struct GmmMember {
    MemberSpec spec;
    std::vector<double> weights;
    std::vector<Matrix> means;
    std::vector<Matrix> variances;
};

// Per-member fit diagnostics: MAP objective after each EM iteration and the
// iterations at which a collapsed component was re-seeded (the objective
// baseline restarts there).
struct FitInfo {
    std::vector<double> objective;
    std::vector<int> reseed_iterations;
};

struct TckModel {
    TckConfig config;
    StandardizationStats stats;
    std::vector<GmmMember> members;
    std::vector<FitInfo> fit_info;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Draws the full list of (max_components-1)*realizations member specs.
/// Deterministic in cfg.master_seed.
std::vector<MemberSpec> sample_member_configs(const TckConfig& cfg, int T, int V, int n_train);

/// Log-likelihood of one view under a diagonal Gaussian, summed over observed
/// cells only; cells with mask 0 contribute exactly 0 and their values are
/// never read.
double log_likelihood_observed(const Matrix& x, const MaskMatrix& mask, const Matrix& mean,
                               const Matrix& variance);

/// Responsibilities P(component | series) for every series in ds, computed in
/// log space with per-row max subtraction. Rows sum to 1.
Matrix posteriors(const GmmMember& member, const TimeSeriesDataset& ds);

/// MAP-EM fit of one member on (a subsample of) the training set.
GmmMember map_em_fit(const MemberSpec& spec, const TimeSeriesDataset& train,
                     FitInfo* info = nullptr);

/// Fits the whole ensemble. Bitwise deterministic in cfg.master_seed for any
/// thread count.
TckModel fit_tck(const TimeSeriesDataset& train, const TckConfig& cfg,
                 const StandardizationStats& stats = {});

/// K = sum over members of P_a * P_b^T. For a == b the result is built
/// symmetric (positive semidefinite by construction).
Matrix kernel_matrix(const TckModel& model, const TimeSeriesDataset& a,
                     const TimeSeriesDataset& b);

// JSON model file with full member parameters, config echo and the
// standardization statistics the model was fitted with.
void save_model(const TckModel& model, const std::string& path);
TckModel load_model(const std::string& path);

}  // namespace tckae::tck

#endif  // TCKAE_TCK_HPP
