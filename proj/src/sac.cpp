#include "skilldisc/sac.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skilldisc/errors.hpp"

namespace sd {

namespace fs = std::filesystem;

SacTrainer::SacTrainer(const Config& cfg, int num_skills, Rng& rng)
    : cfg_(cfg),
      num_skills_(num_skills),
      policy_(cfg.state_dim, cfg.action_dim, num_skills, cfg.gmm_components, cfg.hidden_sizes,
              cfg.gumbel_temperature, rng),
      q1_(cfg.state_dim, num_skills, cfg.action_dim, cfg.hidden_sizes, rng),
      q2_(cfg.state_dim, num_skills, cfg.action_dim, cfg.hidden_sizes, rng),
      opt_policy_(cfg.lr_policy),
      opt_q1_(cfg.lr_q),
      opt_q2_(cfg.lr_q) {
    // Targets start as exact clones.
    q1_target_ = q1_;
    q2_target_ = q2_;
}

Mat SacTrainer::batch_obs(const std::vector<Transition>& batch, bool next) const {
    const int B = static_cast<int>(batch.size());
    Mat obs = Mat::Zero(B, cfg_.state_dim + num_skills_);
    for (int b = 0; b < B; ++b) {
        obs.row(b).head(cfg_.state_dim) = next ? batch[b].next_state : batch[b].state;
        obs(b, cfg_.state_dim + batch[b].skill) = 1.0;
    }
    return obs;
}

Mat SacTrainer::batch_q_input(const std::vector<Transition>& batch, const Mat& actions,
                              bool next) const {
    const int B = static_cast<int>(batch.size());
    Mat in = Mat::Zero(B, cfg_.state_dim + num_skills_ + cfg_.action_dim);
    for (int b = 0; b < B; ++b) {
        in.row(b).head(cfg_.state_dim) = next ? batch[b].next_state : batch[b].state;
        in(b, cfg_.state_dim + batch[b].skill) = 1.0;
        in.row(b).tail(cfg_.action_dim) = actions.row(b);
    }
    return in;
}

Vec SacTrainer::compute_td_target(const std::vector<Transition>& batch, const Vec& rewards,
                                  Rng& rng) const {
    if (batch.empty()) throw ValidationError("compute_td_target: empty batch");
    if (rewards.size() != static_cast<Eigen::Index>(batch.size()))
        throw ValidationError("compute_td_target: reward vector length mismatch");

    Mat next_obs = batch_obs(batch, /*next=*/true);
    Mat next_actions;
    Vec next_log_probs;
    policy_.sample_batch(next_obs, rng, next_actions, next_log_probs);

    Mat qin = batch_q_input(batch, next_actions, /*next=*/true);
    Mat q1v = q1_target_.value_batch(qin);
    Mat q2v = q2_target_.value_batch(qin);

    Vec target(rewards.size());
    for (Eigen::Index b = 0; b < target.size(); ++b) {
        double bootstrap = std::min(q1v(b, 0), q2v(b, 0)) -
                           cfg_.entropy_weight * next_log_probs[b];
        target[b] = rewards[b] +
                    (batch[static_cast<std::size_t>(b)].done ? 0.0 : cfg_.discount * bootstrap);
    }
    return target;
}

std::pair<double, double> SacTrainer::q_update(const std::vector<Transition>& batch,
                                               const Vec& rewards, Rng& rng) {
    Vec target = compute_td_target(batch, rewards, rng);

    const int B = static_cast<int>(batch.size());
    Mat actions(B, cfg_.action_dim);
    for (int b = 0; b < B; ++b) actions.row(b) = batch[static_cast<std::size_t>(b)].action;
    Mat qin = batch_q_input(batch, actions, /*next=*/false);

    double losses[2];
    QFunction* qs[2] = {&q1_, &q2_};
    Adam* opts[2] = {&opt_q1_, &opt_q2_};
    for (int i = 0; i < 2; ++i) {
        ad::Tape tape;
        ad::Tape::Var in = tape.constant(qin);
        auto params = qs[i]->net().params_on(tape);
        ad::Tape::Var pred = qs[i]->net().forward(tape, in, params);
        ad::Tape::Var loss = tape.mean(tape.square(tape.sub(pred, tape.constant(target))));
        losses[i] = tape.val(loss)(0, 0);
        tape.backward(loss);
        std::vector<const Mat*> grads;
        for (auto v : params) grads.push_back(&tape.grad(v));
        opts[i]->step(qs[i]->net().params(), grads);
    }
    if (!std::isfinite(losses[0]) || !std::isfinite(losses[1]))
        throw NumericalError("q_update produced a non-finite loss");
    return {losses[0], losses[1]};
}

double SacTrainer::policy_update(const std::vector<Transition>& batch, Rng& rng) {
    Mat obs = batch_obs(batch, /*next=*/false);

    ad::Tape tape;
    ad::Tape::Var obs_var = tape.constant(obs);
    auto policy_params = policy_.net().params_on(tape);
    auto sample = policy_.reparam_sample(tape, obs_var, policy_params, rng);

    ad::Tape::Var qin = tape.concat_cols({obs_var, sample.action});
    auto q1_params = q1_.net().params_on(tape, /*trainable=*/false);
    auto q2_params = q2_.net().params_on(tape, /*trainable=*/false);
    ad::Tape::Var q1v = q1_.net().forward(tape, qin, q1_params);
    ad::Tape::Var q2v = q2_.net().forward(tape, qin, q2_params);
    ad::Tape::Var qmin = tape.minimum(q1v, q2v);

    // J = E[min Q - alpha * log pi]; descend on -J.
    ad::Tape::Var objective =
        tape.mean(tape.sub(qmin, tape.scale(sample.log_prob, cfg_.entropy_weight)));
    ad::Tape::Var loss = tape.neg(objective);
    double loss_val = tape.val(loss)(0, 0);
    if (!std::isfinite(loss_val)) throw NumericalError("policy_update produced a non-finite loss");
    tape.backward(loss);

    std::vector<const Mat*> grads;
    for (auto v : policy_params) grads.push_back(&tape.grad(v));
    opt_policy_.step(policy_.net().params(), grads);
    ++step_count_;
    return loss_val;
}

void SacTrainer::polyak() {
    polyak_update(std::as_const(q1_).net().params(), q1_target_.net().params(), cfg_.polyak_rate);
    polyak_update(std::as_const(q2_).net().params(), q2_target_.net().params(), cfg_.polyak_rate);
}

void SacTrainer::save(const std::string& dir, long step) const {
    fs::create_directories(dir);
    auto dump = [&](const std::string& name, const Mlp& net) {
        std::ofstream out(dir + "/" + name);
        if (!out) throw ArtifactError("cannot write checkpoint blob '" + dir + "/" + name + "'");
        net.save(out);
    };
    dump("policy.txt", policy_.net());
    dump("q1.txt", q1_.net());
    dump("q2.txt", q2_.net());
    dump("q1_target.txt", q1_target_.net());
    dump("q2_target.txt", q2_target_.net());
    Manifest m;
    m.config_hash = cfg_.hash();
    m.seed = cfg_.seed;
    m.step = step;
    write_manifest(dir + "/manifest.txt", m);
    std::ofstream cfg_out(dir + "/config.txt");
    cfg_out << cfg_.to_string();
}

SacTrainer SacTrainer::load(const std::string& dir, const Config& cfg, int num_skills) {
    Rng rng(0);
    SacTrainer t(cfg, num_skills, rng);
    auto slurp = [&](const std::string& name) {
        std::ifstream in(dir + "/" + name);
        if (!in) throw ArtifactError("missing checkpoint blob '" + dir + "/" + name + "'");
        return Mlp::load(in);
    };
    t.policy_.net() = slurp("policy.txt");
    t.q1_.net() = slurp("q1.txt");
    t.q2_.net() = slurp("q2.txt");
    t.q1_target_.net() = slurp("q1_target.txt");
    t.q2_target_.net() = slurp("q2_target.txt");
    Manifest m = read_manifest(dir + "/manifest.txt");
    t.step_count_ = m.step;
    if (t.policy_.net().input_dim() != cfg.state_dim + num_skills)
        throw ArtifactError("checkpoint '" + dir + "' does not match the configured dimensions");
    return t;
}

void write_manifest(const std::string& path, const Manifest& m) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot write manifest '" + path + "'");
    out << "format_version = " << m.format_version << "\n";
    out << "config_hash = " << m.config_hash << "\n";
    out << "seed = " << m.seed << "\n";
    out << "step = " << m.step << "\n";
}

Manifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot read manifest '" + path + "'");
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string key, eq;
        if (!(ss >> key >> eq) || eq != "=") continue;
        if (key == "format_version") ss >> m.format_version;
        else if (key == "config_hash") ss >> m.config_hash;
        else if (key == "seed") ss >> m.seed;
        else if (key == "step") ss >> m.step;
    }
    return m;
}

SacTrainer train_reference_policy(Environment& env, const Config& cfg,
                                  const std::function<void(const RefEpochMetrics&)>& on_epoch) {
    Config ref_cfg = cfg;
    ref_cfg.state_dim = env.spec().state_dim;
    ref_cfg.action_dim = env.spec().action_dim;

    Rng net_rng = make_rng(cfg.seed, "ref/init");
    Rng env_rng = make_rng(cfg.seed, "ref/env");
    Rng train_rng = make_rng(cfg.seed, "ref/train");
    Rng eval_rng = make_rng(cfg.seed, "ref/eval");

    SacTrainer trainer(ref_cfg, /*num_skills=*/1, net_rng);
    ReplayBuffer buffer(cfg.buffer_capacity, ref_cfg.state_dim, ref_cfg.action_dim, 1);

    Vec state = env.reset(env_rng);
    long env_steps = 0;
    double episode_return = 0.0;
    double return_sum = 0.0;
    int episodes = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        return_sum = 0.0;
        episodes = 0;
        for (int t = 0; t < cfg.env_steps_per_epoch; ++t) {
            Vec action(ref_cfg.action_dim);
            if (env_steps < cfg.init_random_steps) {
                for (int i = 0; i < action.size(); ++i)
                    action[i] = uniform(env_rng, std::nextafter(-1.0, 0.0), 1.0);
            } else {
                action = trainer.policy().sample(state, 0, GmmPolicy::Mode::Stochastic, env_rng);
            }
            StepResult r = env.step(action);
            Transition tr;
            tr.state = state;
            tr.skill = 0;
            tr.action = action;
            tr.next_state = r.next_state;
            tr.extrinsic_reward = r.extrinsic_reward;
            tr.done = r.done;
            buffer.add(tr);
            episode_return += r.extrinsic_reward;
            ++env_steps;
            if (r.done) {
                return_sum += episode_return;
                ++episodes;
                episode_return = 0.0;
                state = env.reset(env_rng);
            } else {
                state = r.next_state;
            }
        }

        double q1_loss = 0.0, q2_loss = 0.0, policy_loss = 0.0;
        int updates = 0;
        for (int i = 0; i < cfg.train_steps_per_epoch && buffer.size() > 0; ++i) {
            auto batch = buffer.sample(cfg.batch_size, train_rng);
            Vec rewards(batch.size());
            for (std::size_t b = 0; b < batch.size(); ++b) rewards[static_cast<Eigen::Index>(b)] = batch[b].extrinsic_reward;
            auto [l1, l2] = trainer.q_update(batch, rewards, train_rng);
            policy_loss += trainer.policy_update(batch, train_rng);
            trainer.polyak();
            q1_loss += l1;
            q2_loss += l2;
            ++updates;
        }

        // Deterministic evaluation rollout.
        double eval_return = 0.0;
        {
            Vec s = env.reset(eval_rng);
            while (true) {
                Vec a = trainer.policy().sample(s, 0, GmmPolicy::Mode::Deterministic, eval_rng);
                StepResult r = env.step(a);
                eval_return += r.extrinsic_reward;
                if (r.done) break;
                s = r.next_state;
            }
            state = env.reset(env_rng);
            episode_return = 0.0;
        }

        if (on_epoch) {
            RefEpochMetrics m;
            m.epoch = epoch;
            m.env_steps = env_steps;
            m.q1_loss = updates ? q1_loss / updates : 0.0;
            m.q2_loss = updates ? q2_loss / updates : 0.0;
            m.policy_loss = updates ? policy_loss / updates : 0.0;
            m.mean_episode_return = episodes ? return_sum / episodes : 0.0;
            m.eval_return = eval_return;
            on_epoch(m);
        }
        if (cfg.early_stop_return > 0.0 && eval_return >= cfg.early_stop_return) break;
    }
    return trainer;
}

}  // namespace sd
