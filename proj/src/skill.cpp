#include "skilldisc/skill.hpp"

#include <cmath>
#include <fstream>

#include "skilldisc/errors.hpp"

namespace sd {

int SkillPrior::sample(Rng& rng) const {
    if (num_skills < 1) throw ValidationError("skill prior: K must be >= 1");
    return uniform_int(rng, 0, num_skills - 1);
}

double SkillPrior::log_prob() const { return -std::log(static_cast<double>(num_skills)); }

double intrinsic_reward(const SkillDiscriminator& disc, const LinearProjection& proj,
                        const Vec& next_state, int skill, const SkillPrior& prior) {
    Vec e = proj.encode_raw(next_state);
    return disc.log_prob(e, skill) - prior.log_prob();
}

double discriminator_update(SkillDiscriminator& disc, Adam& opt, const Mat& embeddings,
                            const std::vector<int>& skills) {
    if (embeddings.rows() != static_cast<Eigen::Index>(skills.size()))
        throw ValidationError("discriminator_update: batch size mismatch");
    ad::Tape tape;
    ad::Tape::Var in = tape.constant(embeddings);
    auto params = disc.net().params_on(tape);
    ad::Tape::Var logits = disc.net().forward(tape, in, params);
    ad::Tape::Var log_probs = tape.log_softmax_rows(logits);
    ad::Tape::Var picked = tape.gather_cols(log_probs, skills);
    ad::Tape::Var loss = tape.neg(tape.mean(picked));
    double loss_val = tape.val(loss)(0, 0);
    if (!std::isfinite(loss_val)) throw NumericalError("discriminator_update: non-finite loss");
    tape.backward(loss);
    std::vector<const Mat*> grads;
    for (auto v : params) grads.push_back(&tape.grad(v));
    opt.step(disc.net().params(), grads);
    return loss_val;
}

SkillTrainer::SkillTrainer(const Config& cfg, const LinearProjection& proj, Rng& net_rng)
    : cfg_(cfg),
      proj_(proj),
      prior_{cfg.num_skills},
      sac_(cfg, cfg.num_skills, net_rng),
      disc_(proj.embedding_dim(), cfg.num_skills, cfg.hidden_sizes, net_rng),
      opt_disc_(cfg.lr_discriminator),
      buffer_(cfg.buffer_capacity, cfg.state_dim, cfg.action_dim, cfg.num_skills),
      env_rng_(make_rng(cfg.seed, "skill/env")),
      train_rng_(make_rng(cfg.seed, "skill/train")) {
    if (proj.state_dim() != cfg.state_dim)
        throw ValidationError("projection state dimension does not match the configured state_dim");
}

SkillEpochMetrics SkillTrainer::run_epoch(Environment& env, int epoch) {
    SkillEpochMetrics m;
    m.epoch = epoch;

    for (int t = 0; t < cfg_.env_steps_per_epoch; ++t) {
        if (!episode_active_) {
            skill_ = prior_.sample(env_rng_);
            state_ = env.reset(env_rng_);
            episode_active_ = true;
        }
        Vec action(cfg_.action_dim);
        if (env_steps_ < cfg_.init_random_steps) {
            for (int i = 0; i < action.size(); ++i)
                action[i] = uniform(env_rng_, std::nextafter(-1.0, 0.0), 1.0);
        } else {
            action = sac_.policy().sample(state_, skill_, GmmPolicy::Mode::Stochastic, env_rng_);
        }
        StepResult r = env.step(action);
        Transition tr;
        tr.state = state_;
        tr.skill = skill_;
        tr.action = action;
        tr.next_state = r.next_state;
        tr.extrinsic_reward = r.extrinsic_reward;
        tr.done = r.done;
        buffer_.add(tr);
        ++env_steps_;
        if (r.done) episode_active_ = false;
        else state_ = r.next_state;
    }
    m.env_steps = env_steps_;

    int updates = 0;
    long correct = 0, total = 0;
    for (int i = 0; i < cfg_.train_steps_per_epoch && buffer_.size() > 0; ++i) {
        auto batch = buffer_.sample(cfg_.batch_size, train_rng_);
        const int B = static_cast<int>(batch.size());

        // Embeddings of the next states, then intrinsic rewards from the
        // current discriminator (never stored at collection time).
        Mat next_states(B, cfg_.state_dim);
        std::vector<int> skills(static_cast<std::size_t>(B));
        for (int b = 0; b < B; ++b) {
            next_states.row(b) = batch[static_cast<std::size_t>(b)].next_state;
            skills[static_cast<std::size_t>(b)] = batch[static_cast<std::size_t>(b)].skill;
        }
        Mat embeddings = proj_.encode_raw(next_states);
        Mat log_probs = disc_.log_probs_batch(embeddings);
        Vec rewards(B);
        for (int b = 0; b < B; ++b) {
            rewards[b] = log_probs(b, skills[static_cast<std::size_t>(b)]) - prior_.log_prob();
            int argmax = 0;
            log_probs.row(b).maxCoeff(&argmax);
            correct += (argmax == skills[static_cast<std::size_t>(b)]) ? 1 : 0;
            ++total;
        }
        m.mean_intrinsic_reward += rewards.mean();

        auto [l1, l2] = sac_.q_update(batch, rewards, train_rng_);
        m.policy_loss += sac_.policy_update(batch, train_rng_);
        sac_.polyak();
        m.disc_loss += discriminator_update(disc_, opt_disc_, embeddings, skills);
        m.q1_loss += l1;
        m.q2_loss += l2;
        ++updates;
    }
    if (updates > 0) {
        m.q1_loss /= updates;
        m.q2_loss /= updates;
        m.policy_loss /= updates;
        m.disc_loss /= updates;
        m.mean_intrinsic_reward /= updates;
        m.disc_acc = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    }
    return m;
}

void SkillTrainer::save(const std::string& dir, long env_steps) const {
    sac_.save(dir, env_steps);
    std::ofstream out(dir + "/discriminator.txt");
    if (!out) throw ArtifactError("cannot write checkpoint blob '" + dir + "/discriminator.txt'");
    disc_.net().save(out);
    proj_.save(dir + "/projection.txt");
}

SkillTrainer SkillTrainer::load(const std::string& dir, const Config& cfg,
                                const LinearProjection& proj) {
    Rng rng(0);
    SkillTrainer t(cfg, proj, rng);
    t.sac_ = SacTrainer::load(dir, cfg, cfg.num_skills);
    std::ifstream in(dir + "/discriminator.txt");
    if (!in) throw ArtifactError("missing checkpoint blob '" + dir + "/discriminator.txt'");
    t.disc_.net() = Mlp::load(in);
    t.env_steps_ = read_manifest(dir + "/manifest.txt").step;
    return t;
}

std::pair<double, double> mi_lower_bound_check(const Mat& joint, const Mat& q) {
    if (joint.rows() != q.rows() || joint.cols() != q.cols())
        throw ValidationError("mi_lower_bound_check: table shape mismatch");
    if (std::abs(joint.sum() - 1.0) > 1e-9)
        throw ValidationError("mi_lower_bound_check: joint table must sum to 1");
    for (Eigen::Index s = 0; s < q.rows(); ++s)
        if (std::abs(q.row(s).sum() - 1.0) > 1e-9)
            throw ValidationError("mi_lower_bound_check: q rows must sum to 1");

    // p(z|s) = joint(s,z) / p(s); terms with joint mass zero contribute nothing.
    double exact = 0.0, bound = 0.0;
    for (Eigen::Index s = 0; s < joint.rows(); ++s) {
        double ps = joint.row(s).sum();
        if (ps <= 0.0) continue;
        for (Eigen::Index z = 0; z < joint.cols(); ++z) {
            double pz = joint(s, z);
            if (pz <= 0.0) continue;
            exact += pz * std::log(pz / ps);
            bound += pz * std::log(q(s, z));
        }
    }
    return {exact, bound};
}

}  // namespace sd
