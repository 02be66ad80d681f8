#pragma once

#include "skilldisc/projection.hpp"
#include "skilldisc/sac.hpp"

namespace sd {

// Fixed uniform prior over the K skills.
struct SkillPrior {
    int num_skills = 1;

    int sample(Rng& rng) const;
    double log_prob() const;  // log(1/K)
};

// Pseudo-reward log q_phi(z | e) - log p(z), with e the projection of the
// next state. Chance-level discrimination gives exactly zero.
double intrinsic_reward(const SkillDiscriminator& disc, const LinearProjection& proj,
                        const Vec& next_state, int skill, const SkillPrior& prior);

// One cross-entropy gradient step on (embedding, skill) pairs; returns the
// mean negative log-likelihood.
double discriminator_update(SkillDiscriminator& disc, Adam& opt, const Mat& embeddings,
                            const std::vector<int>& skills);

struct SkillEpochMetrics {
    int epoch = 0;
    long env_steps = 0;
    double q1_loss = 0.0;
    double q2_loss = 0.0;
    double policy_loss = 0.0;
    double disc_loss = 0.0;
    double disc_acc = 0.0;
    double mean_intrinsic_reward = 0.0;
};

// Skill-discovery loop state: environment interaction with per-episode skill
// resampling feeding the replay buffer, then gradient updates where intrinsic
// rewards are recomputed from the current discriminator.
class SkillTrainer {
public:
    SkillTrainer(const Config& cfg, const LinearProjection& proj, Rng& net_rng);

    SacTrainer& sac() { return sac_; }
    SkillDiscriminator& discriminator() { return disc_; }
    const LinearProjection& projection() const { return proj_; }
    const SkillPrior& prior() const { return prior_; }
    ReplayBuffer& buffer() { return buffer_; }

    // env_steps_per_epoch interactions followed by train_steps_per_epoch
    // update rounds (Q update, policy update, discriminator update).
    SkillEpochMetrics run_epoch(Environment& env, int epoch);

    void save(const std::string& dir, long env_steps) const;
    static SkillTrainer load(const std::string& dir, const Config& cfg,
                             const LinearProjection& proj);

private:
    Config cfg_;
    LinearProjection proj_;
    SkillPrior prior_;
    SacTrainer sac_;
    SkillDiscriminator disc_;
    Adam opt_disc_;
    ReplayBuffer buffer_;
    Rng env_rng_, train_rng_;

    // Interaction state carried across epochs.
    Vec state_;
    int skill_ = 0;
    bool episode_active_ = false;
    long env_steps_ = 0;
};

// Exact enumeration check of the variational bound: returns
// (E_p[log p(z|s)], E_p[log q(z|s)]) for a discrete joint p(s, z) and a
// row-normalized variational table q(z|s). Throws if tables are not normalized.
std::pair<double, double> mi_lower_bound_check(const Mat& joint, const Mat& q);

}  // namespace sd
