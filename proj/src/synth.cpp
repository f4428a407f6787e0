#include "tckae/synth.hpp"

#include <algorithm>
#include <cmath>

#include "tckae/rng.hpp"

namespace tckae::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Class-and-variable missing rate. Even variables are more often missing for
// class 1, odd variables for class 0; an odd trailing variable stays neutral
// so the overall rate matches missing_rate.
double cell_missing_rate(const SynthConfig& cfg, int label, int v) {
    const double half_gap = 0.5 * cfg.informative_missingness *
                            std::min(cfg.missing_rate, 1.0 - cfg.missing_rate);
    double sign;
    if (cfg.v % 2 == 1 && v == cfg.v - 1)
        sign = 0.0;
    else
        sign = (v % 2 == 0) ? 1.0 : -1.0;
    const double cls = (label == 1) ? 1.0 : -1.0;
    return cfg.missing_rate + cls * sign * half_gap;
}

double max_missing_rate(const SynthConfig& cfg) {
    double worst = 0.0;
    for (int label = 0; label < 2; ++label)
        for (int v = 0; v < cfg.v; ++v) worst = std::max(worst, cell_missing_rate(cfg, label, v));
    return worst;
}

}  // namespace

void SynthConfig::validate() const {
    if (n < 4) throw std::invalid_argument("synth: n must be >= 4");
    if (t < 2) throw std::invalid_argument("synth: t must be >= 2");
    if (v < 1) throw std::invalid_argument("synth: v must be >= 1");
    if (!(class_balance > 0.0 && class_balance < 1.0))
        throw std::invalid_argument("synth: class balance must lie in (0,1)");
    if (separation < 0.0) throw std::invalid_argument("synth: separation must be >= 0");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0))
        throw std::invalid_argument("synth: missing rate must lie in [0,1)");
    if (!(informative_missingness >= 0.0 && informative_missingness <= 1.0))
        throw std::invalid_argument("synth: informative missingness must lie in [0,1]");
    if (!(noise_std > 0.0)) throw std::invalid_argument("synth: noise std must be > 0");

    const double worst = max_missing_rate(*this);
    const double expected_observed = (1.0 - worst) * static_cast<double>(t) * v;
    if (worst >= 0.99 || expected_observed < 2.0)
        throw DataError("synth: missing rate too high to guarantee 2 observations per series");
}

TimeSeriesDataset generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);

    // Labels: fixed counts per class, positions shuffled.
    const int n1 = std::clamp(static_cast<int>(std::lround(cfg.n * cfg.class_balance)), 2,
                              cfg.n - 2);
    std::vector<int> labels(static_cast<std::size_t>(cfg.n), 0);
    std::fill(labels.begin(), labels.begin() + n1, 1);
    rng.shuffle(labels);

    TimeSeriesDataset ds(cfg.n, cfg.t, cfg.v);
    ds.labels = labels;

    for (int i = 0; i < cfg.n; ++i) {
        const int label = labels[static_cast<std::size_t>(i)];
        const double shift = (label == 1) ? cfg.separation * cfg.base_shift : 0.0;
        const double period =
            cfg.base_period / (1.0 + cfg.freq_shift * cfg.separation * static_cast<double>(label));

        // Observation mask; the whole series is redrawn if it ends up with
        // fewer than 2 observed cells.
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(cfg.t) * cfg.v, 1);
        for (int attempt = 0;; ++attempt) {
            int observed = 0;
            for (int t = 0; t < cfg.t; ++t)
                for (int v = 0; v < cfg.v; ++v) {
                    const bool miss = rng.uniform() < cell_missing_rate(cfg, label, v);
                    mask[static_cast<std::size_t>(t) * cfg.v + v] = miss ? 0 : 1;
                    if (!miss) ++observed;
                }
            if (observed >= 2) break;
            if (attempt >= 1000)
                throw DataError("synth: could not draw a mask with 2 observations");
        }

        for (int v = 0; v < cfg.v; ++v) {
            const double phase = 2.0 * kPi * static_cast<double>(v) / cfg.v;
            double x = 0.0;
            for (int t = 0; t < cfg.t; ++t) {
                x = cfg.ar_coeff * x + shift +
                    cfg.amplitude * std::sin(2.0 * kPi * static_cast<double>(t) / period + phase) +
                    cfg.noise_std * rng.normal();
                if (mask[static_cast<std::size_t>(t) * cfg.v + v]) ds.set_value(i, t, v, x);
            }
        }
    }
    ds.validate();
    return ds;
}

}  // namespace tckae::synth
