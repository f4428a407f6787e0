#ifndef TCKAE_CLI_HPP
#define TCKAE_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tckae/autoencoder.hpp"
#include "tckae/eval.hpp"
#include "tckae/synth.hpp"
#include "tckae/tck.hpp"

namespace tckae::cli {

// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
// failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct SynthOpts {
    synth::SynthConfig config;
    std::string out;
};

struct TckOpts {
    std::string data;
    double train_fraction = 0.8;
    tck::TckConfig config;
    bool transductive = false;
    std::string out_dir = ".";
};

struct TrainOpts {
    std::string data;
    double train_fraction = 0.8;
    std::string imputation = "zero";
    std::string kernel;            // required when lambda > 0
    std::vector<int> arch = {64, 32};  // encoder sizes after the input; last = code
    ae::TrainConfig config;
    std::string out_dir = ".";
};

struct EvalOpts {
    std::string mode = "codes";  // codes | tck
    std::string data;
    double train_fraction = 0.8;
    // Patterns may contain "{run}", replaced by the run index.
    std::string train_codes;
    std::string test_codes;
    std::string metrics;  // optional metrics.json pattern providing test_mse
    std::string kernel;   // test x train similarity pattern (tck mode)
    int k = 3;
    int runs = 1;
    std::string method;  // report row name; defaults to the mode
    std::string out_json;
    std::string out_csv;
};

struct ProjectOpts {
    std::string mode = "pca";  // pca | kpca
    std::string input;
    std::string data;  // provides the label column
    double train_fraction = 0.8;
    int dims = 2;
    std::string out;
};

struct PipelineOpts {
    std::string config;  // flat JSON config file
    std::string data;    // optional external dataset; otherwise synthesized
    std::string out_dir = "pipeline_out";
    // Overrides; negative/zero means "use the config file value".
    long long seed = -1;
    int runs = 0;
    std::vector<double> lambda_sweep;  // extra dkAE rows when nonempty
};

void run_synth(const SynthOpts& opts);
void run_tck(const TckOpts& opts);
void run_train(const TrainOpts& opts);
void run_eval(const EvalOpts& opts);
void run_project(const ProjectOpts& opts);
void run_pipeline(const PipelineOpts& opts);

/// Full command-line entry point; maps exceptions to exit codes.
int cli_main(int argc, const char* const* argv);

/// Convenience wrapper for in-process invocation.
int cli_main(const std::vector<std::string>& args);

}  // namespace tckae::cli

#endif  // TCKAE_CLI_HPP
