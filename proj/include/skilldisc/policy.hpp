#pragma once

#include <optional>

#include "skilldisc/mlp.hpp"

namespace sd {

using Vec = Eigen::VectorXd;

// Differentiable draw from a categorical relaxation. Output lies on the
// probability simplex; gradients flow to the logits in the tape version.
Vec gumbel_softmax(const Vec& logits, double temperature, Rng& rng);

// Skill-conditioned policy with a tanh-squashed Gaussian-mixture head. The
// network consumes [state; one-hot skill] and emits mixture logits, component
// means, and component log-stds (clamped to [-20, 2]).
class GmmPolicy {
public:
    static constexpr double kLogStdMin = -20.0;
    static constexpr double kLogStdMax = 2.0;

    enum class Mode { Stochastic, Deterministic };

    GmmPolicy() = default;
    GmmPolicy(int state_dim, int action_dim, int num_skills, int n_components,
              const std::vector<int>& hidden, double gumbel_temperature, Rng& rng);

    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }
    int num_skills() const { return num_skills_; }
    int n_components() const { return n_components_; }

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }

    // Single-state action. Stochastic mode samples a component from the
    // mixture weights, then the Gaussian, then squashes; deterministic mode
    // squashes the mean of the highest-weight component. pre_squash, when
    // given, receives the action before tanh.
    Vec sample(const Vec& state, int skill, Mode mode, Rng& rng,
               Vec* pre_squash = nullptr) const;

    // Log-density of the squashed action identified by its pre-squash value,
    // including the tanh change-of-variables correction.
    double log_prob_presquash(const Vec& state, int skill, const Vec& u) const;

    // Batched stochastic sampling used for TD targets (no gradients).
    void sample_batch(const Mat& obs, Rng& rng, Mat& actions, Vec& log_probs) const;

    // Reparameterized batch sample: Gaussian reparametrization per component,
    // Gumbel-Softmax across components, tanh squash. Gradients flow from both
    // outputs to every policy parameter var.
    struct TapeSample {
        ad::Tape::Var action;    // B x A
        ad::Tape::Var log_prob;  // B x 1
    };
    TapeSample reparam_sample(ad::Tape& tape, ad::Tape::Var obs,
                              const std::vector<ad::Tape::Var>& params, Rng& rng) const;

    // Mixture log-density (with squash correction) of pre-squash actions u
    // given the raw head output of the network; both may carry gradients.
    ad::Tape::Var log_prob_on_tape(ad::Tape& tape, ad::Tape::Var head_out,
                                   ad::Tape::Var u) const;

    // Observation row(s) [state; one-hot skill].
    Vec make_obs(const Vec& state, int skill) const;
    int obs_dim() const { return state_dim_ + num_skills_; }

private:
    struct Head {
        Vec logits;    // n_components
        Mat means;     // n_components x A
        Mat log_stds;  // n_components x A, clamped
    };
    Head head(const Vec& obs) const;

    int state_dim_ = 0;
    int action_dim_ = 0;
    int num_skills_ = 0;
    int n_components_ = 0;
    double gumbel_temperature_ = 1.0;
    Mlp net_;
};

}  // namespace sd
