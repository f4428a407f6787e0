#ifndef TCKAE_AUTOENCODER_HPP
#define TCKAE_AUTOENCODER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tckae/core.hpp"

namespace tckae::ae {

enum class Activation { Sigmoid, Linear };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Feed-forward autoencoder with a symmetric layer list [d_in, ..., d_code,
// ..., d_in]. Hidden layers (including the code layer) use the hidden
// activation, the output layer is linear.
struct Autoencoder {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;   // layer l: (sizes[l] x sizes[l+1])
    std::vector<Vector> biases;    // layer l: sizes[l+1]
    Activation hidden_activation = Activation::Sigmoid;

    int layer_count() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return layer_sizes.front(); }
    int code_dim() const {
        return layer_sizes[static_cast<std::size_t>(encoder_layers())];
    }
    /// Number of weight layers in the encoder half.
    int encoder_layers() const { return (static_cast<int>(layer_sizes.size()) - 1) / 2; }
};

struct TrainConfig {
    double lambda = 0.5;  // weight of the code loss in [0,1]
    int batch_size = 32;
    int epochs = 500;
    double learning_rate = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> total_loss;  // per epoch, on the full training set
    std::vector<double> recon_loss;
    std::vector<double> code_loss;
    std::optional<double> holdout_recon;  // final reconstruction loss on held-out data
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

/// Glorot-uniform weights, zero biases, deterministic per seed.
Autoencoder init_network(const std::vector<int>& layer_sizes, std::uint64_t seed,
                         Activation hidden_activation = Activation::Sigmoid);

Matrix encode(const Autoencoder& net, const Matrix& x);
Matrix decode(const Autoencoder& net, const Matrix& codes);

/// Mean squared error over samples and dimensions.
double reconstruction_loss(const Matrix& x, const Matrix& reconstruction);

/// Normalized Frobenius distance between the code inner-product matrix and
/// the prior kernel: || C/||C||_F - K/||K||_F ||_F with C = codes * codes^T.
/// A zero-norm side is replaced by the zero matrix.
double code_loss(const Matrix& codes, const Matrix& kernel_batch);

double total_loss(const Matrix& x, const Matrix& reconstruction, const Matrix& codes,
                  const Matrix& kernel_batch, double lambda);

/// Analytic gradients of the total loss for one batch. kernel_batch may be
/// null when lambda == 0.
Gradients gradients(const Autoencoder& net, const Matrix& x_batch, const Matrix* kernel_batch,
                    double lambda);

/// Test hook: called once per mini-batch with the global row indices and the
/// kernel submatrix used for that batch.
using BatchHook = std::function<void(const std::vector<int>&, const Matrix&)>;

/// Adam training over shuffled mini-batches. kernel_prior must cover the rows
/// of x_train when lambda > 0; the per-batch kernel is its submatrix at the
/// batch's indices. holdout, when given, only contributes the final
/// reconstruction-loss entry of the history.
std::pair<Autoencoder, TrainHistory> train(const Autoencoder& net, const Matrix& x_train,
                                           const Matrix* kernel_prior, const TrainConfig& cfg,
                                           const Matrix* holdout = nullptr,
                                           const BatchHook& hook = {});

// Checkpoint: single JSON document with sizes, parameters, activation tags
// and a training-config echo.
void save_checkpoint(const Autoencoder& net, const TrainConfig& cfg, const std::string& path);
std::pair<Autoencoder, TrainConfig> load_checkpoint(const std::string& path);

}  // namespace tckae::ae

#endif  // TCKAE_AUTOENCODER_HPP
