#ifndef TCKAE_SYNTH_HPP
#define TCKAE_SYNTH_HPP

#include <cstdint>

#include "tckae/core.hpp"

namespace tckae::synth {

// Two-class synthetic MTS generator. Class structure enters through the
// dynamics (level shift and oscillation frequency of an AR(1) signal) and,
// when informative_missingness > 0, through class-dependent per-variable
// missing rates.
struct SynthConfig {
    int n = 600;
    int t = 20;
    int v = 10;
    double class_balance = 0.5;            // fraction of label-1 series
    double separation = 1.0;               // scales the class shift in level/frequency
    double missing_rate = 0.5;             // average fraction of missing cells
    double informative_missingness = 0.8;  // 0: rates identical across classes
    double noise_std = 0.3;
    std::uint64_t seed = 0;

    // Dynamics constants: x_t = ar_coeff*x_{t-1} + shift_c
    //                         + amplitude*sin(2*pi*t/period_c + phase_v) + noise
    double ar_coeff = 0.7;
    double base_shift = 0.5;
    double amplitude = 1.0;
    double base_period = 10.0;
    double freq_shift = 0.35;

    void validate() const;
};

TimeSeriesDataset generate(const SynthConfig& cfg);

}  // namespace tckae::synth

#endif  // TCKAE_SYNTH_HPP
