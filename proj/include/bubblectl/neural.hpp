/** \file neural.hpp
 *  Dense feed-forward networks with exact reverse-mode gradients and an
 *  adaptive-moment optimizer. Small and batched: all heavy math goes through
 *  Eigen matrix products with the minibatch laid out as columns.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace bubblectl {

enum class Activation : std::uint32_t { relu = 0, tanh = 1, linear = 2 };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

struct MlpSpec {
    std::vector<int> layer_sizes;  ///< input, hidden..., output widths
    Activation hidden_activation = Activation::tanh;
    Activation output_activation = Activation::tanh;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
    void validate() const;
    bool operator==(const MlpSpec&) const = default;
};

/// Per-layer weight matrices (out x in) and bias vectors.
struct MlpParams {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
};

/// Uniform +-1/sqrt(fan_in) for hidden layers; the final layer starts near
/// zero (+-3e-3) so initial outputs sit at mid-range.
MlpParams init_params(const MlpSpec& spec, std::mt19937_64& rng);

/// Columns of X are samples; returns one output column per sample.
Eigen::MatrixXd forward(const MlpParams& params, const MlpSpec& spec,
                        const Eigen::MatrixXd& X);

/// Convenience single-sample forward.
Eigen::VectorXd forward(const MlpParams& params, const MlpSpec& spec,
                        const Eigen::VectorXd& x);

struct Gradients {
    std::vector<Eigen::MatrixXd> gW;
    std::vector<Eigen::VectorXd> gb;
    Eigen::MatrixXd gX;  ///< gradient w.r.t. the input, one column per sample
};

/// Exact reverse-mode derivatives of sum_batch <upstream_col, output_col>.
Gradients gradients(const MlpParams& params, const MlpSpec& spec,
                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& upstream);

struct AdamState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    std::int64_t t = 0;
};

AdamState make_adam_state(const MlpParams& params);

/// Bias-corrected adaptive-moment update, decay 0.9 / 0.999, eps 1e-8.
void adam_step(MlpParams& params, const Gradients& grads, AdamState& state, double lr);

/// Versioned binary checkpoint: header (spec, seed, step count) followed by
/// raw little-endian 64-bit parameter arrays in layer order. See README for
/// the exact layout.
void save_checkpoint(const std::string& path, const MlpSpec& spec,
                     const MlpParams& params, std::uint64_t seed,
                     std::uint64_t step_count);

struct Checkpoint {
    MlpSpec spec;
    MlpParams params;
    std::uint64_t seed = 0;
    std::uint64_t step_count = 0;
};

/// Throws std::runtime_error on missing file, bad magic/version, or shape
/// mismatch.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bubblectl
