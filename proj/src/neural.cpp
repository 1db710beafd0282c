#include "bubblectl/neural.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace bubblectl {

namespace {

void apply_activation(Eigen::MatrixXd& Z, Activation a) {
    switch (a) {
        case Activation::relu:
            Z = Z.cwiseMax(0.0);
            break;
        case Activation::tanh:
            Z = Z.array().tanh().matrix();
            break;
        case Activation::linear:
            break;
    }
}

// derivative expressed through the activated value A = act(Z)
Eigen::MatrixXd activation_deriv(const Eigen::MatrixXd& A, Activation act) {
    switch (act) {
        case Activation::relu:
            return (A.array() > 0.0).cast<double>().matrix();
        case Activation::tanh:
            return (1.0 - A.array().square()).matrix();
        case Activation::linear:
            return Eigen::MatrixXd::Ones(A.rows(), A.cols());
    }
    throw std::logic_error("unreachable");
}

}  // namespace

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "linear") return Activation::linear;
    throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::linear: return "linear";
    }
    return "?";
}

void MlpSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("MlpSpec: need at least input and output sizes");
    for (int s : layer_sizes)
        if (s <= 0) throw std::invalid_argument("MlpSpec: layer sizes must be positive");
}

MlpParams init_params(const MlpSpec& spec, std::mt19937_64& rng) {
    spec.validate();
    MlpParams p;
    const int L = spec.num_layers();
    p.W.reserve(L);
    p.b.reserve(L);
    for (int l = 0; l < L; ++l) {
        const int fan_in = spec.layer_sizes[l];
        const int fan_out = spec.layer_sizes[l + 1];
        const double bound = (l == L - 1) ? 3.0e-3 : 1.0 / std::sqrt(double(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd W(fan_out, fan_in);
        Eigen::VectorXd b(fan_out);
        for (int i = 0; i < fan_out; ++i) {
            for (int j = 0; j < fan_in; ++j) W(i, j) = u(rng);
            b(i) = u(rng);
        }
        p.W.push_back(std::move(W));
        p.b.push_back(std::move(b));
    }
    return p;
}

Eigen::MatrixXd forward(const MlpParams& params, const MlpSpec& spec,
                        const Eigen::MatrixXd& X) {
    if (X.rows() != spec.input_size())
        throw std::invalid_argument("forward: input size mismatch");
    const int L = spec.num_layers();
    Eigen::MatrixXd A = X;
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd Z = params.W[l] * A;
        Z.colwise() += params.b[l];
        apply_activation(Z, l == L - 1 ? spec.output_activation : spec.hidden_activation);
        A = std::move(Z);
    }
    return A;
}

Eigen::VectorXd forward(const MlpParams& params, const MlpSpec& spec,
                        const Eigen::VectorXd& x) {
    return forward(params, spec, Eigen::MatrixXd(x));
}

Gradients gradients(const MlpParams& params, const MlpSpec& spec,
                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& upstream) {
    if (X.rows() != spec.input_size())
        throw std::invalid_argument("gradients: input size mismatch");
    if (upstream.rows() != spec.output_size() || upstream.cols() != X.cols())
        throw std::invalid_argument("gradients: upstream shape mismatch");

    const int L = spec.num_layers();
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = X, acts[l+1] = layer l output
    acts.reserve(L + 1);
    acts.push_back(X);
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd Z = params.W[l] * acts.back();
        Z.colwise() += params.b[l];
        apply_activation(Z, l == L - 1 ? spec.output_activation : spec.hidden_activation);
        acts.push_back(std::move(Z));
    }

    Gradients g;
    g.gW.resize(L);
    g.gb.resize(L);
    Eigen::MatrixXd delta = upstream;
    for (int l = L - 1; l >= 0; --l) {
        const Activation act = l == L - 1 ? spec.output_activation : spec.hidden_activation;
        delta = delta.cwiseProduct(activation_deriv(acts[l + 1], act));
        g.gW[l].noalias() = delta * acts[l].transpose();
        g.gb[l] = delta.rowwise().sum();
        if (l > 0)
            delta = (params.W[l].transpose() * delta).eval();
        else
            g.gX.noalias() = params.W[0].transpose() * delta;
    }
    return g;
}

AdamState make_adam_state(const MlpParams& params) {
    AdamState s;
    for (const auto& W : params.W) {
        s.mW.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
        s.vW.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
    }
    for (const auto& b : params.b) {
        s.mb.push_back(Eigen::VectorXd::Zero(b.size()));
        s.vb.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    return s;
}

void adam_step(MlpParams& params, const Gradients& grads, AdamState& state, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1.0e-8;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(beta2, double(state.t));
    for (std::size_t l = 0; l < params.W.size(); ++l) {
        state.mW[l] = beta1 * state.mW[l] + (1 - beta1) * grads.gW[l];
        state.vW[l] =
            beta2 * state.vW[l].array() + (1 - beta2) * grads.gW[l].array().square();
        params.W[l].array() -= lr * (state.mW[l].array() / bc1) /
                               ((state.vW[l].array() / bc2).sqrt() + eps);
        state.mb[l] = beta1 * state.mb[l] + (1 - beta1) * grads.gb[l];
        state.vb[l] =
            beta2 * state.vb[l].array() + (1 - beta2) * grads.gb[l].array().square();
        params.b[l].array() -= lr * (state.mb[l].array() / bc1) /
                               ((state.vb[l].array() / bc2).sqrt() + eps);
    }
}

namespace {

constexpr char ckpt_magic[8] = {'B', 'U', 'B', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t ckpt_version = 1;

template <class T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void read_pod(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
}

}  // namespace

void save_checkpoint(const std::string& path, const MlpSpec& spec,
                     const MlpParams& params, std::uint64_t seed,
                     std::uint64_t step_count) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(ckpt_magic, sizeof ckpt_magic);
    write_pod(os, ckpt_version);
    write_pod(os, static_cast<std::uint32_t>(spec.hidden_activation));
    write_pod(os, static_cast<std::uint32_t>(spec.output_activation));
    write_pod(os, static_cast<std::uint32_t>(spec.layer_sizes.size()));
    write_pod(os, seed);
    write_pod(os, step_count);
    for (int s : spec.layer_sizes) write_pod(os, static_cast<std::uint32_t>(s));
    for (std::size_t l = 0; l < params.W.size(); ++l) {
        os.write(reinterpret_cast<const char*>(params.W[l].data()),
                 sizeof(double) * params.W[l].size());
        os.write(reinterpret_cast<const char*>(params.b[l].data()),
                 sizeof(double) * params.b[l].size());
    }
    if (!os) throw std::runtime_error("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, ckpt_magic, sizeof magic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint32_t version = 0, hidden = 0, output = 0, n_sizes = 0;
    read_pod(is, version);
    if (version != ckpt_version)
        throw std::runtime_error("unsupported checkpoint version in " + path);
    read_pod(is, hidden);
    read_pod(is, output);
    read_pod(is, n_sizes);
    Checkpoint ck;
    read_pod(is, ck.seed);
    read_pod(is, ck.step_count);
    if (!is || n_sizes < 2 || n_sizes > 64 || hidden > 2 || output > 2)
        throw std::runtime_error("corrupt checkpoint header: " + path);
    ck.spec.hidden_activation = static_cast<Activation>(hidden);
    ck.spec.output_activation = static_cast<Activation>(output);
    ck.spec.layer_sizes.resize(n_sizes);
    for (auto& s : ck.spec.layer_sizes) {
        std::uint32_t v = 0;
        read_pod(is, v);
        if (!is || v == 0 || v > 1u << 20)
            throw std::runtime_error("corrupt checkpoint header: " + path);
        s = static_cast<int>(v);
    }
    for (std::size_t l = 0; l + 1 < n_sizes; ++l) {
        Eigen::MatrixXd W(ck.spec.layer_sizes[l + 1], ck.spec.layer_sizes[l]);
        Eigen::VectorXd b(ck.spec.layer_sizes[l + 1]);
        is.read(reinterpret_cast<char*>(W.data()), sizeof(double) * W.size());
        is.read(reinterpret_cast<char*>(b.data()), sizeof(double) * b.size());
        if (!is) throw std::runtime_error("truncated checkpoint payload: " + path);
        ck.params.W.push_back(std::move(W));
        ck.params.b.push_back(std::move(b));
    }
    is.peek();
    if (!is.eof()) throw std::runtime_error("trailing bytes in checkpoint: " + path);
    return ck;
}

}  // namespace bubblectl
