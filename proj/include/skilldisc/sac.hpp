#pragma once

#include <functional>
#include <string>
#include <utility>

#include "skilldisc/config.hpp"
#include "skilldisc/env.hpp"
#include "skilldisc/networks.hpp"
#include "skilldisc/policy.hpp"
#include "skilldisc/replay.hpp"

namespace sd {

// Soft actor-critic core: twin Q-functions with target clones, a squashed
// Gaussian-mixture policy updated through the minimum of the two Q-functions,
// and polyak-averaged target updates. Rewards are supplied by the caller, so
// the same trainer serves extrinsic (reference) and intrinsic (skill) runs.
class SacTrainer {
public:
    SacTrainer(const Config& cfg, int num_skills, Rng& rng);

    GmmPolicy& policy() { return policy_; }
    const GmmPolicy& policy() const { return policy_; }
    QFunction& q1() { return q1_; }
    QFunction& q2() { return q2_; }
    QFunction& q1_target() { return q1_target_; }
    QFunction& q2_target() { return q2_target_; }
    int num_skills() const { return num_skills_; }

    // r + gamma * (min_i Q^i_target(s', a') - alpha * log pi(a'|s')) with
    // a' ~ pi(.|s', z); terminal transitions truncate the bootstrap. No
    // gradients flow anywhere.
    Vec compute_td_target(const std::vector<Transition>& batch, const Vec& rewards, Rng& rng) const;

    // One squared-TD-error gradient step on each Q network; returns both losses.
    std::pair<double, double> q_update(const std::vector<Transition>& batch, const Vec& rewards,
                                       Rng& rng);

    // One ascent step on min_i Q^i(pi(a|s)) + alpha * H, actions drawn in
    // reparameterized mode; returns the (negated objective) loss.
    double policy_update(const std::vector<Transition>& batch, Rng& rng);

    void polyak();  // targets <- tau * main + (1 - tau) * targets

    // Per-network parameter blobs plus a manifest under `dir`.
    void save(const std::string& dir, long step) const;
    static SacTrainer load(const std::string& dir, const Config& cfg, int num_skills);

    long step_count() const { return step_count_; }

private:
    Mat batch_obs(const std::vector<Transition>& batch, bool next) const;
    Mat batch_q_input(const std::vector<Transition>& batch, const Mat& actions, bool next) const;

    Config cfg_;
    int num_skills_;
    GmmPolicy policy_;
    QFunction q1_, q2_, q1_target_, q2_target_;
    Adam opt_policy_, opt_q1_, opt_q2_;
    long step_count_ = 0;
};

struct RefEpochMetrics {
    int epoch = 0;
    long env_steps = 0;
    double q1_loss = 0.0;
    double q2_loss = 0.0;
    double policy_loss = 0.0;
    double mean_episode_return = 0.0;  // behavior returns this epoch
    double eval_return = 0.0;          // deterministic rollout after the epoch
};

// Trains a single-skill (K=1) agent against the extrinsic environment reward.
// Stops early once the deterministic evaluation return reaches
// cfg.early_stop_return. Throws NumericalError on non-finite losses.
SacTrainer train_reference_policy(
    Environment& env, const Config& cfg,
    const std::function<void(const RefEpochMetrics&)>& on_epoch = {});

// Checkpoint manifest helpers shared by every artifact writer.
struct Manifest {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    long step = 0;
    int format_version = 1;
};
void write_manifest(const std::string& path, const Manifest& m);
Manifest read_manifest(const std::string& path);

}  // namespace sd
