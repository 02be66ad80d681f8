#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "skilldisc/autodiff.hpp"
#include "skilldisc/rng.hpp"

namespace sd {

using Mat = Eigen::MatrixXd;

// Fully connected network with rectifier hidden activations and a linear
// output layer. Weights are row-major in the sense that forward() maps
// row-vector batches: Y = relu(...relu(X W0 + b0)...) W_L + b_L.
class Mlp {
public:
    Mlp() = default;
    Mlp(int input_dim, const std::vector<int>& hidden, int output_dim);

    void init(Rng& rng);  // He-style scaled normal initialization

    int input_dim() const { return input_dim_; }
    int output_dim() const { return output_dim_; }

    // Plain forward pass; rows of X are independent inputs.
    Mat forward(const Mat& X) const;

    // Tape-based forward pass through externally registered parameter vars,
    // so gradients can be read back (or blocked, when registered as constants).
    ad::Tape::Var forward(ad::Tape& tape, ad::Tape::Var X,
                          const std::vector<ad::Tape::Var>& params) const;

    // Parameters in a stable order: W0, b0, W1, b1, ...
    std::vector<Mat*> params();
    std::vector<const Mat*> params() const;
    std::vector<ad::Tape::Var> params_on(ad::Tape& tape, bool trainable = true) const;
    void set_from(const ad::Tape& tape, const std::vector<ad::Tape::Var>& vars);

    void save(std::ostream& out) const;
    static Mlp load(std::istream& in);

    bool operator==(const Mlp& other) const;

private:
    int input_dim_ = 0;
    int output_dim_ = 0;
    std::vector<Mat> weights_;  // in x out per layer
    std::vector<Mat> biases_;   // 1 x out per layer
};

// Standard first-order adaptive-moment optimizer, one state per parameter.
class Adam {
public:
    explicit Adam(double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads);

    double lr() const { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Mat> m_, v_;
};

// theta_target <- tau * theta + (1 - tau) * theta_target, elementwise.
void polyak_update(const std::vector<const Mat*>& main_params,
                   const std::vector<Mat*>& target_params, double tau);

}  // namespace sd
