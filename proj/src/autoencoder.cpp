#include "tckae/autoencoder.hpp"

#include <cmath>

#include "json.hpp"
#include "tckae/rng.hpp"

namespace tckae::ae {

namespace {

Matrix apply_activation(const Matrix& z, Activation act) {
    if (act == Activation::Linear) return z;
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

// Derivative expressed through the activation value itself.
Matrix activation_derivative(const Matrix& a, Activation act) {
    if (act == Activation::Linear) return Matrix::Ones(a.rows(), a.cols());
    return (a.array() * (1.0 - a.array())).matrix();
}

// Activations of every layer: out[0] = x, out[L] = reconstruction. All layers
// but the last use the hidden activation; the output layer is linear.
std::vector<Matrix> forward(const Autoencoder& net, const Matrix& x) {
    const int L = net.layer_count();
    std::vector<Matrix> acts(static_cast<std::size_t>(L) + 1);
    acts[0] = x;
    for (int l = 0; l < L; ++l) {
        Matrix z = acts[static_cast<std::size_t>(l)] * net.weights[static_cast<std::size_t>(l)];
        z.rowwise() += net.biases[static_cast<std::size_t>(l)].transpose();
        const Activation act = (l == L - 1) ? Activation::Linear : net.hidden_activation;
        acts[static_cast<std::size_t>(l) + 1] = apply_activation(z, act);
    }
    return acts;
}

void check_symmetric(const Matrix& k) {
    const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("kernel batch is not symmetric");
}

// Gradient of code_loss with respect to the codes. Zero when the code Gram
// vanishes (degenerate-batch rule) or at perfect alignment.
Matrix code_loss_gradient(const Matrix& codes, const Matrix& kernel_batch) {
    const Matrix gram = codes * codes.transpose();
    const double gram_norm = gram.norm();
    if (gram_norm == 0.0) return Matrix::Zero(codes.rows(), codes.cols());
    const double kernel_norm = kernel_batch.norm();
    const Matrix a = gram / gram_norm;
    const Matrix diff =
        kernel_norm > 0.0 ? Matrix(a - kernel_batch / kernel_norm) : a;
    const double loss = diff.norm();
    if (loss < 1e-15) return Matrix::Zero(codes.rows(), codes.cols());
    const Matrix m = diff / loss;
    const Matrix d_gram = (m - a * (a.cwiseProduct(m).sum())) / gram_norm;
    return 2.0 * d_gram * codes;  // d_gram is symmetric
}

}  // namespace

std::string activation_name(Activation a) {
    return a == Activation::Sigmoid ? "sigmoid" : "linear";
}

Activation parse_activation(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "linear") return Activation::Linear;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

void TrainConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("lambda must lie in [0,1]");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (lambda > 0.0 && batch_size < 2)
        throw std::invalid_argument("batch size must be >= 2 when lambda > 0");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
}

Autoencoder init_network(const std::vector<int>& layer_sizes, std::uint64_t seed,
                         Activation hidden_activation) {
    const std::size_t n = layer_sizes.size();
    if (n < 3 || n % 2 == 0)
        throw std::invalid_argument("layer sizes must be an odd-length list of >= 3 entries");
    for (std::size_t i = 0; i < n; ++i) {
        if (layer_sizes[i] < 1) throw std::invalid_argument("layer sizes must be positive");
        if (layer_sizes[i] != layer_sizes[n - 1 - i])
            throw std::invalid_argument("layer sizes must be symmetric around the code layer");
    }
    if (layer_sizes[n / 2] >= layer_sizes[0])
        throw std::invalid_argument("code layer must be smaller than the input layer");

    Autoencoder net;
    net.layer_sizes = layer_sizes;
    net.hidden_activation = hidden_activation;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < n; ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double scale = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (int r = 0; r < fan_in; ++r)
            for (int c = 0; c < fan_out; ++c) w(r, c) = rng.uniform(-scale, scale);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Vector::Zero(fan_out));
    }
    return net;
}

Matrix encode(const Autoencoder& net, const Matrix& x) {
    if (x.cols() != net.input_dim())
        throw std::invalid_argument("encode: input has " + std::to_string(x.cols()) +
                                    " columns, network expects " +
                                    std::to_string(net.input_dim()));
    Matrix a = x;
    for (int l = 0; l < net.encoder_layers(); ++l) {
        Matrix z = a * net.weights[static_cast<std::size_t>(l)];
        z.rowwise() += net.biases[static_cast<std::size_t>(l)].transpose();
        a = apply_activation(z, net.hidden_activation);
    }
    return a;
}

Matrix decode(const Autoencoder& net, const Matrix& codes) {
    if (codes.cols() != net.code_dim())
        throw std::invalid_argument("decode: input has " + std::to_string(codes.cols()) +
                                    " columns, network expects " + std::to_string(net.code_dim()));
    const int L = net.layer_count();
    Matrix a = codes;
    for (int l = net.encoder_layers(); l < L; ++l) {
        Matrix z = a * net.weights[static_cast<std::size_t>(l)];
        z.rowwise() += net.biases[static_cast<std::size_t>(l)].transpose();
        a = apply_activation(z, l == L - 1 ? Activation::Linear : net.hidden_activation);
    }
    return a;
}

double reconstruction_loss(const Matrix& x, const Matrix& reconstruction) {
    if (x.rows() != reconstruction.rows() || x.cols() != reconstruction.cols())
        throw std::invalid_argument("reconstruction loss: shape mismatch");
    return (x - reconstruction).squaredNorm() /
           (static_cast<double>(x.rows()) * static_cast<double>(x.cols()));
}

double code_loss(const Matrix& codes, const Matrix& kernel_batch) {
    if (codes.rows() < 2) throw std::invalid_argument("code loss needs at least 2 samples");
    if (kernel_batch.rows() != codes.rows() || kernel_batch.cols() != codes.rows())
        throw std::invalid_argument("kernel batch shape does not match batch size");
    check_symmetric(kernel_batch);
    const Matrix gram = codes * codes.transpose();
    const double gram_norm = gram.norm();
    const double kernel_norm = kernel_batch.norm();
    const Matrix a = gram_norm > 0.0 ? Matrix(gram / gram_norm)
                                     : Matrix(Matrix::Zero(gram.rows(), gram.cols()));
    const Matrix b = kernel_norm > 0.0 ? Matrix(kernel_batch / kernel_norm)
                                       : Matrix(Matrix::Zero(gram.rows(), gram.cols()));
    return (a - b).norm();
}

double total_loss(const Matrix& x, const Matrix& reconstruction, const Matrix& codes,
                  const Matrix& kernel_batch, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("lambda must lie in [0,1]");
    const double recon = reconstruction_loss(x, reconstruction);
    if (lambda == 0.0) return recon;
    return (1.0 - lambda) * recon + lambda * code_loss(codes, kernel_batch);
}

Gradients gradients(const Autoencoder& net, const Matrix& x_batch, const Matrix* kernel_batch,
                    double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("lambda must lie in [0,1]");
    if (lambda > 0.0) {
        if (kernel_batch == nullptr)
            throw std::invalid_argument("lambda > 0 requires a kernel batch");
        if (x_batch.rows() < 2)
            throw std::invalid_argument("lambda > 0 requires batches of >= 2 samples");
        if (kernel_batch->rows() != x_batch.rows() || kernel_batch->cols() != x_batch.rows())
            throw std::invalid_argument("kernel batch shape does not match batch size");
        check_symmetric(*kernel_batch);
    }

    const int L = net.layer_count();
    const std::vector<Matrix> acts = forward(net, x_batch);

    Gradients grads;
    grads.weights.resize(static_cast<std::size_t>(L));
    grads.biases.resize(static_cast<std::size_t>(L));

    const double denom = static_cast<double>(x_batch.rows()) * x_batch.cols();
    // Output layer is linear, so the delta equals the loss derivative itself.
    Matrix delta =
        (1.0 - lambda) * (2.0 / denom) * (acts[static_cast<std::size_t>(L)] - x_batch);
    grads.weights[static_cast<std::size_t>(L - 1)].noalias() =
        acts[static_cast<std::size_t>(L - 1)].transpose() * delta;
    grads.biases[static_cast<std::size_t>(L - 1)] = delta.colwise().sum().transpose();

    for (int l = L - 2; l >= 0; --l) {
        Matrix d_act = delta * net.weights[static_cast<std::size_t>(l) + 1].transpose();
        if (l + 1 == net.encoder_layers() && lambda > 0.0)
            d_act.noalias() +=
                lambda * code_loss_gradient(acts[static_cast<std::size_t>(l) + 1], *kernel_batch);
        delta = d_act.cwiseProduct(
            activation_derivative(acts[static_cast<std::size_t>(l) + 1], net.hidden_activation));
        grads.weights[static_cast<std::size_t>(l)].noalias() =
            acts[static_cast<std::size_t>(l)].transpose() * delta;
        grads.biases[static_cast<std::size_t>(l)] = delta.colwise().sum().transpose();
    }
    return grads;
}

std::pair<Autoencoder, TrainHistory> train(const Autoencoder& net, const Matrix& x_train,
                                           const Matrix* kernel_prior, const TrainConfig& cfg,
                                           const Matrix* holdout, const BatchHook& hook) {
    cfg.validate();
    if (x_train.cols() != net.input_dim())
        throw std::invalid_argument("train: input dimension mismatch");
    if (cfg.lambda > 0.0) {
        if (kernel_prior == nullptr)
            throw std::invalid_argument("lambda > 0 requires a prior kernel");
        if (kernel_prior->rows() != x_train.rows() || kernel_prior->cols() != x_train.rows())
            throw std::invalid_argument("prior kernel must be square over the training rows");
    }

    Autoencoder model = net;
    TrainHistory history;
    Rng rng(cfg.seed);

    const int L = model.layer_count();
    std::vector<Matrix> m_w(static_cast<std::size_t>(L)), v_w(static_cast<std::size_t>(L));
    std::vector<Vector> m_b(static_cast<std::size_t>(L)), v_b(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        m_w[static_cast<std::size_t>(l)] = Matrix::Zero(model.weights[static_cast<std::size_t>(l)].rows(),
                                                        model.weights[static_cast<std::size_t>(l)].cols());
        v_w[static_cast<std::size_t>(l)] = m_w[static_cast<std::size_t>(l)];
        m_b[static_cast<std::size_t>(l)] = Vector::Zero(model.biases[static_cast<std::size_t>(l)].size());
        v_b[static_cast<std::size_t>(l)] = m_b[static_cast<std::size_t>(l)];
    }

    const int n = static_cast<int>(x_train.rows());
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int size = std::min(cfg.batch_size, n - start);
            if (size < 2) continue;  // a 1x1 code Gram is degenerate
            std::vector<int> indices(order.begin() + start, order.begin() + start + size);

            Matrix x_batch(size, x_train.cols());
            for (int r = 0; r < size; ++r)
                x_batch.row(r) = x_train.row(indices[static_cast<std::size_t>(r)]);
            Matrix k_batch;
            if (cfg.lambda > 0.0) {
                k_batch.resize(size, size);
                for (int r = 0; r < size; ++r)
                    for (int c = 0; c < size; ++c)
                        k_batch(r, c) = (*kernel_prior)(indices[static_cast<std::size_t>(r)],
                                                        indices[static_cast<std::size_t>(c)]);
            }
            if (hook) hook(indices, k_batch);

            const Gradients grads =
                gradients(model, x_batch, cfg.lambda > 0.0 ? &k_batch : nullptr, cfg.lambda);

            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (int l = 0; l < L; ++l) {
                const auto li = static_cast<std::size_t>(l);
                m_w[li] = cfg.beta1 * m_w[li] + (1.0 - cfg.beta1) * grads.weights[li];
                v_w[li] = cfg.beta2 * v_w[li] +
                          (1.0 - cfg.beta2) * grads.weights[li].cwiseProduct(grads.weights[li]);
                model.weights[li].array() -=
                    cfg.learning_rate * (m_w[li].array() / bc1) /
                    ((v_w[li].array() / bc2).sqrt() + cfg.adam_eps);
                m_b[li] = cfg.beta1 * m_b[li] + (1.0 - cfg.beta1) * grads.biases[li];
                v_b[li] = cfg.beta2 * v_b[li] +
                          (1.0 - cfg.beta2) * grads.biases[li].cwiseProduct(grads.biases[li]);
                model.biases[li].array() -=
                    cfg.learning_rate * (m_b[li].array() / bc1) /
                    ((v_b[li].array() / bc2).sqrt() + cfg.adam_eps);
            }
        }

        // Epoch summary on the full training set.
        const Matrix codes = encode(model, x_train);
        const Matrix recon = decode(model, codes);
        const double recon_l = reconstruction_loss(x_train, recon);
        const double code_l = cfg.lambda > 0.0 ? code_loss(codes, *kernel_prior) : 0.0;
        const double total = (1.0 - cfg.lambda) * recon_l + cfg.lambda * code_l;
        if (!std::isfinite(total))
            throw NumericError(
                "training diverged (non-finite loss at epoch " + std::to_string(epoch) +
                "); try a smaller learning rate or fewer epochs");
        history.total_loss.push_back(total);
        history.recon_loss.push_back(recon_l);
        history.code_loss.push_back(code_l);
    }

    if (holdout != nullptr)
        history.holdout_recon = reconstruction_loss(*holdout, decode(model, encode(model, *holdout)));
    return {std::move(model), std::move(history)};
}

// ---------------------------------------------------------------------------
// Checkpoints
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
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    return m;
}

}  // namespace

void save_checkpoint(const Autoencoder& net, const TrainConfig& cfg, const std::string& path) {
    json j;
    j["format"] = "ae-checkpoint-v1";
    j["layer_sizes"] = net.layer_sizes;
    j["hidden_activation"] = activation_name(net.hidden_activation);
    j["output_activation"] = "linear";
    json weights = json::array(), biases = json::array();
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        weights.push_back(matrix_to_json(net.weights[l]));
        json b = json::array();
        for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) b.push_back(net.biases[l](i));
        biases.push_back(std::move(b));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["train_config"] = {{"lambda", cfg.lambda},
                         {"batch_size", cfg.batch_size},
                         {"epochs", cfg.epochs},
                         {"learning_rate", cfg.learning_rate},
                         {"beta1", cfg.beta1},
                         {"beta2", cfg.beta2},
                         {"adam_eps", cfg.adam_eps},
                         {"seed", cfg.seed}};
    write_file_atomic(path, j.dump(1) + "\n");
}

std::pair<Autoencoder, TrainConfig> load_checkpoint(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError("cannot parse checkpoint '" + path + "': " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ae-checkpoint-v1")
            throw DataError("unknown checkpoint format in '" + path + "'");
        Autoencoder net;
        net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        net.hidden_activation = parse_activation(j.at("hidden_activation").get<std::string>());
        for (const json& w : j.at("weights")) net.weights.push_back(matrix_from_json(w));
        for (const json& b : j.at("biases")) {
            Vector v(static_cast<Eigen::Index>(b.size()));
            for (Eigen::Index i = 0; i < v.size(); ++i)
                v(i) = b.at(static_cast<std::size_t>(i)).get<double>();
            net.biases.push_back(std::move(v));
        }
        if (net.weights.size() + 1 != net.layer_sizes.size() ||
            net.biases.size() != net.weights.size())
            throw DataError("checkpoint layer structure is inconsistent");
        TrainConfig cfg;
        const json& c = j.at("train_config");
        cfg.lambda = c.at("lambda").get<double>();
        cfg.batch_size = c.at("batch_size").get<int>();
        cfg.epochs = c.at("epochs").get<int>();
        cfg.learning_rate = c.at("learning_rate").get<double>();
        cfg.beta1 = c.at("beta1").get<double>();
        cfg.beta2 = c.at("beta2").get<double>();
        cfg.adam_eps = c.at("adam_eps").get<double>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        return {std::move(net), cfg};
    } catch (const json::exception& e) {
        throw DataError("invalid checkpoint '" + path + "': " + e.what());
    }
}

}  // namespace tckae::ae
