#pragma once

#include "skilldisc/mlp.hpp"

namespace sd {

using Vec = Eigen::VectorXd;

// Q(s, one-hot z, a) -> scalar. Twin instances plus target clones live in the
// trainer; this class is a single network.
class QFunction {
public:
    QFunction() = default;
    QFunction(int state_dim, int num_skills, int action_dim, const std::vector<int>& hidden, Rng& rng);

    double value(const Vec& state, int skill, const Vec& action) const;
    Mat value_batch(const Mat& inputs) const;  // rows = [state, one-hot, action]

    Vec make_input(const Vec& state, int skill, const Vec& action) const;
    int input_dim() const { return state_dim_ + num_skills_ + action_dim_; }

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }

private:
    int state_dim_ = 0, num_skills_ = 0, action_dim_ = 0;
    Mlp net_;
};

// q_phi(z | e): embedding -> K skill log-probabilities. The skill one-hot is
// never an input here.
class SkillDiscriminator {
public:
    SkillDiscriminator() = default;
    SkillDiscriminator(int embedding_dim, int num_skills, const std::vector<int>& hidden, Rng& rng);

    int embedding_dim() const { return embedding_dim_; }
    int num_skills() const { return num_skills_; }

    Vec log_probs(const Vec& embedding) const;       // log-softmax normalized
    Mat log_probs_batch(const Mat& embeddings) const;
    double log_prob(const Vec& embedding, int skill) const;

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }

private:
    int embedding_dim_ = 0, num_skills_ = 0;
    Mlp net_;
};

// h_psi(x | e): embedding -> probability that the state came from the
// reference policy. Discarded after encoder pretraining.
class ExpertClassifier {
public:
    ExpertClassifier() = default;
    ExpertClassifier(int embedding_dim, const std::vector<int>& hidden, Rng& rng);

    double prob(const Vec& embedding) const;    // strictly inside (0, 1)
    double logit(const Vec& embedding) const;

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }

private:
    int embedding_dim_ = 0;
    Mlp net_;
};

}  // namespace sd
