#include "tckae/tck.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>
#include <thread>

#include "json.hpp"
#include "tckae/rng.hpp"

namespace tckae::tck {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kVarianceFloor = 1e-6;
constexpr double kWeightCollapse = 1e-8;
constexpr double kCountEps = 1e-12;

void extract_view(const TimeSeriesDataset& ds, int i, const MemberSpec& spec, Matrix& x,
                  MaskMatrix& mask) {
    const int L = spec.segment_length();
    const int A = spec.attribute_count();
    x.resize(L, A);
    mask.resize(L, A);
    for (int t = 0; t < L; ++t)
        for (int a = 0; a < A; ++a) {
            const int tt = spec.seg_begin + t;
            const int vv = spec.attributes[static_cast<std::size_t>(a)];
            if (ds.observed(i, tt, vv)) {
                x(t, a) = ds.value(i, tt, vv);
                mask(t, a) = 1;
            } else {
                x(t, a) = 0.0;  // never read; the mask gates every access
                mask(t, a) = 0;
            }
        }
}

// Informative prior for one member, built from the observed cells of its
// training subsample. The component-mean prior is a per-variable Gaussian
// process over the segment's time axis: marginal precision a0 * (empirical
// precision), temporal correlation from a Gaussian kernel of width
// n0 * segment_length. Variances shrink toward the empirical variance with
// pseudo-count b0.
struct MemberPrior {
    Matrix mu0;        // L x A empirical means
    Matrix emp_var;    // L x A empirical variances (clamped below)
    double a0 = 0.0, b0 = 0.0;
    std::vector<Matrix> lambda0;        // per attribute: L x L prior precision
    std::vector<double> logdet_sigma0;  // per attribute

    double mean_log_prior(const Matrix& mean) const {
        if (a0 <= 0.0) return 0.0;
        const auto L = static_cast<double>(mu0.rows());
        double total = 0.0;
        for (int a = 0; a < mu0.cols(); ++a) {
            const Vector d = mean.col(a) - mu0.col(a);
            const double qform = d.dot(lambda0[static_cast<std::size_t>(a)] * d);
            total += -0.5 * (qform + logdet_sigma0[static_cast<std::size_t>(a)] + L * kLog2Pi);
        }
        return total;
    }

    double variance_log_prior(const Matrix& variance) const {
        if (b0 <= 0.0) return 0.0;
        double total = 0.0;
        for (int t = 0; t < variance.rows(); ++t)
            for (int a = 0; a < variance.cols(); ++a) {
                const double s2 = variance(t, a);
                total += -0.5 * b0 * (std::log(s2) + emp_var(t, a) / s2);
            }
        return total;
    }
};

MemberPrior build_prior(const MemberSpec& spec, const std::vector<Matrix>& views,
                        const std::vector<MaskMatrix>& masks) {
    const int L = spec.segment_length();
    const int A = spec.attribute_count();
    MemberPrior prior;
    prior.a0 = spec.a0;
    prior.b0 = spec.b0;
    prior.mu0 = Matrix::Zero(L, A);
    prior.emp_var = Matrix::Ones(L, A);

    Matrix sum = Matrix::Zero(L, A), sumsq = Matrix::Zero(L, A), count = Matrix::Zero(L, A);
    for (std::size_t i = 0; i < views.size(); ++i)
        for (int t = 0; t < L; ++t)
            for (int a = 0; a < A; ++a)
                if (masks[i](t, a)) {
                    sum(t, a) += views[i](t, a);
                    sumsq(t, a) += views[i](t, a) * views[i](t, a);
                    count(t, a) += 1.0;
                }
    // cells with < 2 observations keep the standardized defaults (0, 1)
    for (int t = 0; t < L; ++t)
        for (int a = 0; a < A; ++a)
            if (count(t, a) >= 2.0) {
                const double m = sum(t, a) / count(t, a);
                prior.mu0(t, a) = m;
                prior.emp_var(t, a) = std::max(sumsq(t, a) / count(t, a) - m * m, 1e-4);
            }

    if (spec.a0 > 0.0) {
        const double sigma = std::max(spec.n0 * static_cast<double>(L), 1e-3);
        Matrix g(L, L);
        for (int t = 0; t < L; ++t)
            for (int u = 0; u < L; ++u) {
                const double dt = static_cast<double>(t - u);
                g(t, u) = std::exp(-dt * dt / (2.0 * sigma * sigma));
            }
        g.diagonal().array() += 1e-6;  // conditioning for wide kernels
        const Eigen::LLT<Matrix> llt(g);
        if (llt.info() != Eigen::Success)
            throw NumericError("mean-prior kernel is not positive definite");
        const Matrix g_inv = llt.solve(Matrix::Identity(L, L));
        double logdet_g = 0.0;
        for (int t = 0; t < L; ++t) logdet_g += 2.0 * std::log(llt.matrixL()(t, t));

        prior.lambda0.resize(static_cast<std::size_t>(A));
        prior.logdet_sigma0.resize(static_cast<std::size_t>(A));
        for (int a = 0; a < A; ++a) {
            Vector inv_sqrt_d(L);
            double logdet_d = 0.0;
            for (int t = 0; t < L; ++t) {
                inv_sqrt_d(t) = 1.0 / std::sqrt(prior.emp_var(t, a));
                logdet_d += std::log(prior.emp_var(t, a));
            }
            prior.lambda0[static_cast<std::size_t>(a)] =
                spec.a0 * (inv_sqrt_d.asDiagonal() * g_inv * inv_sqrt_d.asDiagonal());
            prior.logdet_sigma0[static_cast<std::size_t>(a)] =
                -static_cast<double>(L) * std::log(spec.a0) + logdet_g + logdet_d;
        }
    }
    return prior;
}

// Responsibilities and total data log-likelihood at the current parameters.
double e_step(const GmmMember& member, const std::vector<Matrix>& views,
              const std::vector<MaskMatrix>& masks, Matrix& resp) {
    const int n = static_cast<int>(views.size());
    const int G = member.spec.components;
    resp.resize(n, G);

    std::vector<Matrix> log_var(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g)
        log_var[static_cast<std::size_t>(g)] =
            member.variances[static_cast<std::size_t>(g)].array().log().matrix();

    double total = 0.0;
    Vector logp(G);
    for (int i = 0; i < n; ++i) {
        const Matrix& x = views[static_cast<std::size_t>(i)];
        const MaskMatrix& mask = masks[static_cast<std::size_t>(i)];
        for (int g = 0; g < G; ++g) {
            const auto gi = static_cast<std::size_t>(g);
            const Matrix& mean = member.means[gi];
            const Matrix& var = member.variances[gi];
            double ll = 0.0;
            for (int t = 0; t < x.rows(); ++t)
                for (int a = 0; a < x.cols(); ++a)
                    if (mask(t, a)) {
                        const double d = x(t, a) - mean(t, a);
                        ll += -0.5 * (kLog2Pi + log_var[gi](t, a) + d * d / var(t, a));
                    }
            logp(g) = std::log(member.weights[gi]) + ll;
        }
        const double mx = logp.maxCoeff();
        double denom = 0.0;
        for (int g = 0; g < G; ++g) {
            resp(i, g) = std::exp(logp(g) - mx);
            denom += resp(i, g);
        }
        resp.row(i) /= denom;
        total += mx + std::log(denom);
    }
    return total;
}

double log_prior(const GmmMember& member, const MemberPrior& prior) {
    double total = 0.0;
    for (int g = 0; g < member.spec.components; ++g) {
        total += prior.mean_log_prior(member.means[static_cast<std::size_t>(g)]);
        total += prior.variance_log_prior(member.variances[static_cast<std::size_t>(g)]);
    }
    return total;
}

void seed_component(GmmMember& member, int g, const std::vector<Matrix>& views,
                    const std::vector<MaskMatrix>& masks, const MemberPrior& prior,
                    std::size_t idx) {
    const auto gi = static_cast<std::size_t>(g);
    member.means[gi] = prior.mu0;
    for (int t = 0; t < views[idx].rows(); ++t)
        for (int a = 0; a < views[idx].cols(); ++a)
            if (masks[idx](t, a)) member.means[gi](t, a) = views[idx](t, a);
    member.variances[gi] = prior.emp_var.cwiseMax(kVarianceFloor);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration sampling
// ---------------------------------------------------------------------------

void TckConfig::validate(int T, int V) const {
    if (max_components < 2) throw std::invalid_argument("tck: max components must be >= 2");
    if (realizations < 1) throw std::invalid_argument("tck: realizations must be >= 1");
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
        throw std::invalid_argument("tck: subsample fraction must lie in (0,1]");
    if (em_max_iters < 0) throw std::invalid_argument("tck: em iterations must be >= 0");
    if (em_tol < 0.0) throw std::invalid_argument("tck: em tolerance must be >= 0");
    if (threads < 1) throw std::invalid_argument("tck: threads must be >= 1");
    if (!(a0_min > 0.0 && a0_min <= a0_max) || !(b0_min > 0.0 && b0_min <= b0_max) ||
        !(n0_min > 0.0 && n0_min <= n0_max))
        throw std::invalid_argument(
            "tck: prior hyperparameter ranges must be positive and nonempty");

    const int min_seg = min_segment_length == 0 ? std::min(6, T) : min_segment_length;
    const int max_seg = max_segment_length == 0 ? T : max_segment_length;
    if (min_seg < 2) throw std::invalid_argument("tck: min segment length must be >= 2");
    if (min_seg > T)
        throw std::invalid_argument("tck: min segment length exceeds series length T=" +
                                    std::to_string(T));
    if (max_seg < min_seg || max_seg > T)
        throw std::invalid_argument("tck: segment length bounds are infeasible");
    if (min_attributes < 1) throw std::invalid_argument("tck: min attributes must be >= 1");
    if (min_attributes > V)
        throw std::invalid_argument("tck: min attribute count exceeds variable count V=" +
                                    std::to_string(V));
}

std::vector<MemberSpec> sample_member_configs(const TckConfig& cfg, int T, int V, int n_train) {
    cfg.validate(T, V);
    if (n_train < 1) throw std::invalid_argument("tck: empty training set");

    const int min_seg = cfg.min_segment_length == 0 ? std::min(6, T) : cfg.min_segment_length;
    const int max_seg = cfg.max_segment_length == 0 ? T : cfg.max_segment_length;
    const int min_attrs = std::max(1, cfg.min_attributes);

    Rng rng(cfg.master_seed);
    std::vector<MemberSpec> specs;
    specs.reserve(static_cast<std::size_t>(cfg.member_count()));
    int index = 0;
    for (int g = 2; g <= cfg.max_components; ++g)
        for (int r = 0; r < cfg.realizations; ++r, ++index) {
            MemberSpec spec;
            spec.components = g;
            const int len = min_seg + static_cast<int>(rng.uniform_int(
                                          static_cast<std::uint64_t>(max_seg - min_seg + 1)));
            spec.seg_begin =
                static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(T - len + 1)));
            spec.seg_end = spec.seg_begin + len;
            const int n_attrs = min_attrs + static_cast<int>(rng.uniform_int(
                                                static_cast<std::uint64_t>(V - min_attrs + 1)));
            spec.attributes = rng.sample_without_replacement(V, n_attrs);
            spec.a0 = rng.uniform(cfg.a0_min, cfg.a0_max);
            spec.b0 = rng.uniform(cfg.b0_min, cfg.b0_max);
            spec.n0 = rng.uniform(cfg.n0_min, cfg.n0_max);
            int n_sub = static_cast<int>(std::floor(cfg.subsample_fraction * n_train));
            n_sub = std::max(n_sub, 1);
            if (n_sub < g && n_train >= g) n_sub = g;  // EM needs G distinct seed points
            spec.subsample = rng.sample_without_replacement(n_train, n_sub);
            spec.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index));
            spec.em_max_iters = cfg.em_max_iters;
            spec.em_tol = cfg.em_tol;
            specs.push_back(std::move(spec));
        }
    return specs;
}

// ---------------------------------------------------------------------------
// Likelihood and posteriors
// ---------------------------------------------------------------------------

double log_likelihood_observed(const Matrix& x, const MaskMatrix& mask, const Matrix& mean,
                               const Matrix& variance) {
    if (x.rows() != mask.rows() || x.cols() != mask.cols() || x.rows() != mean.rows() ||
        x.cols() != mean.cols() || x.rows() != variance.rows() || x.cols() != variance.cols())
        throw std::invalid_argument("log_likelihood_observed: shape mismatch");
    double ll = 0.0;
    for (int t = 0; t < x.rows(); ++t)
        for (int a = 0; a < x.cols(); ++a)
            if (mask(t, a)) {
                const double s2 = variance(t, a);
                const double d = x(t, a) - mean(t, a);
                ll += -0.5 * (kLog2Pi + std::log(s2) + d * d / s2);
            }
    return ll;
}

Matrix posteriors(const GmmMember& member, const TimeSeriesDataset& ds) {
    const int N = ds.num_series();
    std::vector<Matrix> views(static_cast<std::size_t>(N));
    std::vector<MaskMatrix> masks(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        extract_view(ds, i, member.spec, views[static_cast<std::size_t>(i)],
                     masks[static_cast<std::size_t>(i)]);
    Matrix resp;
    e_step(member, views, masks, resp);
    return resp;
}

// ---------------------------------------------------------------------------
// MAP-EM
// ---------------------------------------------------------------------------

GmmMember map_em_fit(const MemberSpec& spec, const TimeSeriesDataset& train, FitInfo* info) {
    const int G = spec.components;
    const int L = spec.segment_length();
    const int A = spec.attribute_count();
    if (spec.subsample.empty()) throw std::invalid_argument("tck: empty training subsample");
    if (G < 1) throw std::invalid_argument("tck: component count must be >= 1");
    if (L < 1 || A < 1) throw std::invalid_argument("tck: empty member view");
    if (static_cast<int>(spec.subsample.size()) < G)
        throw NumericError("tck: subsample smaller than component count G=" + std::to_string(G));
    for (const int idx : spec.subsample)
        if (idx < 0 || idx >= train.num_series())
            throw std::invalid_argument("tck: subsample index out of range");
    if (spec.seg_begin < 0 || spec.seg_end > train.num_steps())
        throw std::invalid_argument("tck: segment out of range");
    for (const int v : spec.attributes)
        if (v < 0 || v >= train.num_variables())
            throw std::invalid_argument("tck: attribute index out of range");

    const int n = static_cast<int>(spec.subsample.size());
    std::vector<Matrix> views(static_cast<std::size_t>(n));
    std::vector<MaskMatrix> masks(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        extract_view(train, spec.subsample[static_cast<std::size_t>(i)], spec,
                     views[static_cast<std::size_t>(i)], masks[static_cast<std::size_t>(i)]);

    const MemberPrior prior = build_prior(spec, views, masks);

    // Init: means from G distinct subsample series (prior mean where missing),
    // variances at the prior variance, uniform weights.
    Rng rng(spec.seed);
    GmmMember member;
    member.spec = spec;
    member.weights.assign(static_cast<std::size_t>(G), 1.0 / G);
    member.means.resize(static_cast<std::size_t>(G));
    member.variances.resize(static_cast<std::size_t>(G));
    {
        const std::vector<int> picks = rng.sample_without_replacement(n, G);
        for (int g = 0; g < G; ++g)
            seed_component(member, g, views, masks, prior,
                           static_cast<std::size_t>(picks[static_cast<std::size_t>(g)]));
    }

    Matrix resp;
    double objective = e_step(member, views, masks, resp) + log_prior(member, prior);
    if (info) {
        info->objective.clear();
        info->reseed_iterations.clear();
        info->objective.push_back(objective);
    }

    int reseed_count = 0;
    for (int iter = 1; iter <= spec.em_max_iters; ++iter) {
        bool reseeded = false;

        // --- M-step ----------------------------------------------------
        // Weights.
        for (int g = 0; g < G; ++g)
            member.weights[static_cast<std::size_t>(g)] = resp.col(g).sum() / n;

        // Collapsed components are re-seeded from a random training series.
        for (int g = 0; g < G; ++g)
            if (member.weights[static_cast<std::size_t>(g)] < kWeightCollapse) {
                if (++reseed_count > 3)
                    throw NumericError("tck: component collapsed more than 3 times (G=" +
                                       std::to_string(G) + ", seed=" + std::to_string(spec.seed) +
                                       ")");
                seed_component(member, g, views, masks, prior,
                               static_cast<std::size_t>(rng.uniform_int(
                                   static_cast<std::uint64_t>(n))));
                member.weights[static_cast<std::size_t>(g)] = 1.0 / G;
                double wsum = 0.0;
                for (const double w : member.weights) wsum += w;
                for (double& w : member.weights) w /= wsum;
                reseeded = true;
            }

        // Means: per component and attribute, exact MAP solve of
        // (Lambda0 + diag(w/s2)) m = Lambda0 mu0 + sum(r*mask*x)/s2
        // with s2 the current variances.
        for (int g = 0; g < G; ++g) {
            const auto gi = static_cast<std::size_t>(g);
            Matrix wsum = Matrix::Zero(L, A), xsum = Matrix::Zero(L, A);
            for (int i = 0; i < n; ++i) {
                const double r = resp(i, g);
                const Matrix& x = views[static_cast<std::size_t>(i)];
                const MaskMatrix& mask = masks[static_cast<std::size_t>(i)];
                for (int t = 0; t < L; ++t)
                    for (int a = 0; a < A; ++a)
                        if (mask(t, a)) {
                            wsum(t, a) += r;
                            xsum(t, a) += r * x(t, a);
                        }
            }
            if (spec.a0 > 0.0) {
                for (int a = 0; a < A; ++a) {
                    Matrix system = prior.lambda0[static_cast<std::size_t>(a)];
                    Vector rhs = system * prior.mu0.col(a);
                    for (int t = 0; t < L; ++t) {
                        const double s2 = member.variances[gi](t, a);
                        system(t, t) += wsum(t, a) / s2;
                        rhs(t) += xsum(t, a) / s2;
                    }
                    member.means[gi].col(a) = system.ldlt().solve(rhs);
                }
            } else {
                // No mean prior: plain responsibility-weighted average; cells
                // without any weighted observation keep their previous value.
                for (int t = 0; t < L; ++t)
                    for (int a = 0; a < A; ++a)
                        if (wsum(t, a) > kCountEps)
                            member.means[gi](t, a) = xsum(t, a) / wsum(t, a);
            }

            // Variances: shrinkage toward the empirical variance.
            Matrix sse = Matrix::Zero(L, A);
            for (int i = 0; i < n; ++i) {
                const double r = resp(i, g);
                const Matrix& x = views[static_cast<std::size_t>(i)];
                const MaskMatrix& mask = masks[static_cast<std::size_t>(i)];
                for (int t = 0; t < L; ++t)
                    for (int a = 0; a < A; ++a)
                        if (mask(t, a)) {
                            const double d = x(t, a) - member.means[gi](t, a);
                            sse(t, a) += r * d * d;
                        }
            }
            for (int t = 0; t < L; ++t)
                for (int a = 0; a < A; ++a) {
                    const double denom = wsum(t, a) + spec.b0;
                    if (denom > kCountEps)
                        member.variances[gi](t, a) = std::max(
                            (sse(t, a) + spec.b0 * prior.emp_var(t, a)) / denom, kVarianceFloor);
                }
        }

        // --- E-step at the new parameters + objective --------------------
        const double data_ll = e_step(member, views, masks, resp);
        const double new_objective = data_ll + log_prior(member, prior);
        if (info) {
            info->objective.push_back(new_objective);
            if (reseeded) info->reseed_iterations.push_back(iter);
        }
        const bool converged = !reseeded && (new_objective - objective) < spec.em_tol;
        objective = new_objective;
        if (converged) break;
    }

    for (int g = 0; g < G; ++g) {
        const auto gi = static_cast<std::size_t>(g);
        if (!member.means[gi].allFinite() || !member.variances[gi].allFinite() ||
            !std::isfinite(member.weights[gi]))
            throw NumericError("tck: non-finite member parameters after fit (seed=" +
                               std::to_string(spec.seed) + ")");
    }
    return member;
}

// ---------------------------------------------------------------------------
// Ensemble fit and kernel assembly
// ---------------------------------------------------------------------------

TckModel fit_tck(const TimeSeriesDataset& train, const TckConfig& cfg,
                 const StandardizationStats& stats) {
    if (train.num_series() < 1) throw std::invalid_argument("tck: empty training set");
    const auto specs =
        sample_member_configs(cfg, train.num_steps(), train.num_variables(), train.num_series());

    TckModel model;
    model.config = cfg;
    model.stats = stats;
    model.members.resize(specs.size());
    model.fit_info.resize(specs.size());

    std::vector<std::string> failures(specs.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= specs.size()) return;
            try {
                model.members[i] = map_em_fit(specs[i], train, &model.fit_info[i]);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };

    const int n_threads = std::min<int>(cfg.threads, static_cast<int>(specs.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < specs.size(); ++i)
        if (!failures[i].empty())
            throw NumericError("tck: member " + std::to_string(i) + " (G=" +
                               std::to_string(specs[i].components) + ") failed: " + failures[i]);
    return model;
}

Matrix kernel_matrix(const TckModel& model, const TimeSeriesDataset& a,
                     const TimeSeriesDataset& b) {
    if (model.members.empty()) throw std::invalid_argument("tck: model has no members");
    const bool same = &a == &b;
    Matrix kernel = Matrix::Zero(a.num_series(), b.num_series());
    // Fixed member order keeps the summation deterministic for any thread
    // count used during fitting.
    for (const GmmMember& member : model.members) {
        const Matrix pa = posteriors(member, a);
        if (same) {
            kernel.selfadjointView<Eigen::Lower>().rankUpdate(pa, 1.0);
        } else {
            const Matrix pb = posteriors(member, b);
            kernel.noalias() += pa * pb.transpose();
        }
    }
    if (same) kernel = kernel.selfadjointView<Eigen::Lower>();
    return kernel;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw DataError("ragged matrix in model file");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

}  // namespace

void save_model(const TckModel& model, const std::string& path) {
    json j;
    j["format"] = "tck-model-v1";
    const TckConfig& c = model.config;
    j["config"] = {{"max_components", c.max_components},
                   {"realizations", c.realizations},
                   {"min_segment_length", c.min_segment_length},
                   {"max_segment_length", c.max_segment_length},
                   {"min_attributes", c.min_attributes},
                   {"subsample_fraction", c.subsample_fraction},
                   {"a0_min", c.a0_min},
                   {"a0_max", c.a0_max},
                   {"b0_min", c.b0_min},
                   {"b0_max", c.b0_max},
                   {"n0_min", c.n0_min},
                   {"n0_max", c.n0_max},
                   {"em_max_iters", c.em_max_iters},
                   {"em_tol", c.em_tol},
                   {"master_seed", c.master_seed},
                   {"threads", c.threads}};
    j["stats"] = {{"mean", model.stats.mean}, {"stddev", model.stats.stddev}};
    json members = json::array();
    for (const GmmMember& m : model.members) {
        json jm;
        jm["components"] = m.spec.components;
        jm["seg_begin"] = m.spec.seg_begin;
        jm["seg_end"] = m.spec.seg_end;
        jm["attributes"] = m.spec.attributes;
        jm["a0"] = m.spec.a0;
        jm["b0"] = m.spec.b0;
        jm["n0"] = m.spec.n0;
        jm["subsample"] = m.spec.subsample;
        jm["seed"] = m.spec.seed;
        jm["em_max_iters"] = m.spec.em_max_iters;
        jm["em_tol"] = m.spec.em_tol;
        jm["weights"] = m.weights;
        json means = json::array(), variances = json::array();
        for (std::size_t g = 0; g < m.means.size(); ++g) {
            means.push_back(matrix_to_json(m.means[g]));
            variances.push_back(matrix_to_json(m.variances[g]));
        }
        jm["means"] = std::move(means);
        jm["variances"] = std::move(variances);
        members.push_back(std::move(jm));
    }
    j["members"] = std::move(members);
    json diag = json::array();
    for (const FitInfo& info : model.fit_info)
        diag.push_back({{"objective", info.objective}, {"reseeds", info.reseed_iterations}});
    j["diagnostics"] = std::move(diag);
    write_file_atomic(path, j.dump(1) + "\n");
}

TckModel load_model(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError("cannot parse model file '" + path + "': " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "tck-model-v1")
            throw DataError("unknown model format in '" + path + "'");
        TckModel model;
        const json& c = j.at("config");
        model.config.max_components = c.at("max_components").get<int>();
        model.config.realizations = c.at("realizations").get<int>();
        model.config.min_segment_length = c.at("min_segment_length").get<int>();
        model.config.max_segment_length = c.at("max_segment_length").get<int>();
        model.config.min_attributes = c.at("min_attributes").get<int>();
        model.config.subsample_fraction = c.at("subsample_fraction").get<double>();
        model.config.a0_min = c.at("a0_min").get<double>();
        model.config.a0_max = c.at("a0_max").get<double>();
        model.config.b0_min = c.at("b0_min").get<double>();
        model.config.b0_max = c.at("b0_max").get<double>();
        model.config.n0_min = c.at("n0_min").get<double>();
        model.config.n0_max = c.at("n0_max").get<double>();
        model.config.em_max_iters = c.at("em_max_iters").get<int>();
        model.config.em_tol = c.at("em_tol").get<double>();
        model.config.master_seed = c.at("master_seed").get<std::uint64_t>();
        model.config.threads = c.at("threads").get<int>();
        model.stats.mean = j.at("stats").at("mean").get<std::vector<double>>();
        model.stats.stddev = j.at("stats").at("stddev").get<std::vector<double>>();
        for (const json& jm : j.at("members")) {
            GmmMember m;
            m.spec.components = jm.at("components").get<int>();
            m.spec.seg_begin = jm.at("seg_begin").get<int>();
            m.spec.seg_end = jm.at("seg_end").get<int>();
            m.spec.attributes = jm.at("attributes").get<std::vector<int>>();
            m.spec.a0 = jm.at("a0").get<double>();
            m.spec.b0 = jm.at("b0").get<double>();
            m.spec.n0 = jm.at("n0").get<double>();
            m.spec.subsample = jm.at("subsample").get<std::vector<int>>();
            m.spec.seed = jm.at("seed").get<std::uint64_t>();
            m.spec.em_max_iters = jm.at("em_max_iters").get<int>();
            m.spec.em_tol = jm.at("em_tol").get<double>();
            m.weights = jm.at("weights").get<std::vector<double>>();
            for (const json& g : jm.at("means")) m.means.push_back(matrix_from_json(g));
            for (const json& g : jm.at("variances")) m.variances.push_back(matrix_from_json(g));
            if (m.means.size() != static_cast<std::size_t>(m.spec.components) ||
                m.variances.size() != m.means.size())
                throw DataError("component count mismatch in model file");
            model.members.push_back(std::move(m));
        }
        if (j.contains("diagnostics"))
            for (const json& d : j.at("diagnostics")) {
                FitInfo info;
                info.objective = d.at("objective").get<std::vector<double>>();
                info.reseed_iterations = d.at("reseeds").get<std::vector<int>>();
                model.fit_info.push_back(std::move(info));
            }
        return model;
    } catch (const json::exception& e) {
        throw DataError("invalid model file '" + path + "': " + e.what());
    }
}

}  // namespace tckae::tck
