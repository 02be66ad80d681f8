#include "skilldisc/networks.hpp"

#include <cmath>

#include "skilldisc/errors.hpp"

namespace sd {

QFunction::QFunction(int state_dim, int num_skills, int action_dim,
                     const std::vector<int>& hidden, Rng& rng)
    : state_dim_(state_dim), num_skills_(num_skills), action_dim_(action_dim) {
    net_ = Mlp(state_dim + num_skills + action_dim, hidden, 1);
    net_.init(rng);
}

Vec QFunction::make_input(const Vec& state, int skill, const Vec& action) const {
    if (state.size() != state_dim_ || action.size() != action_dim_)
        throw ValidationError("q-function: input dimension mismatch");
    if (skill < 0 || skill >= num_skills_) throw ValidationError("q-function: skill out of range");
    Vec in = Vec::Zero(input_dim());
    in.head(state_dim_) = state;
    in[state_dim_ + skill] = 1.0;
    in.tail(action_dim_) = action;
    return in;
}

double QFunction::value(const Vec& state, int skill, const Vec& action) const {
    return net_.forward(make_input(state, skill, action).transpose())(0, 0);
}

Mat QFunction::value_batch(const Mat& inputs) const { return net_.forward(inputs); }

SkillDiscriminator::SkillDiscriminator(int embedding_dim, int num_skills,
                                       const std::vector<int>& hidden, Rng& rng)
    : embedding_dim_(embedding_dim), num_skills_(num_skills) {
    net_ = Mlp(embedding_dim, hidden, num_skills);
    net_.init(rng);
}

Vec SkillDiscriminator::log_probs(const Vec& embedding) const {
    if (embedding.size() != embedding_dim_)
        throw ValidationError("discriminator: embedding dimension mismatch");
    Vec logits = net_.forward(embedding.transpose()).row(0);
    double m = logits.maxCoeff();
    double lse = m + std::log((logits.array() - m).exp().sum());
    return logits.array() - lse;
}

Mat SkillDiscriminator::log_probs_batch(const Mat& embeddings) const {
    Mat logits = net_.forward(embeddings);
    Vec m = logits.rowwise().maxCoeff();
    Mat shifted = logits.colwise() - m;
    Vec lse = m.array() + shifted.array().exp().rowwise().sum().log();
    return logits.colwise() - lse;
}

double SkillDiscriminator::log_prob(const Vec& embedding, int skill) const {
    if (skill < 0 || skill >= num_skills_) throw ValidationError("discriminator: skill out of range");
    return log_probs(embedding)[skill];
}

ExpertClassifier::ExpertClassifier(int embedding_dim, const std::vector<int>& hidden, Rng& rng)
    : embedding_dim_(embedding_dim) {
    net_ = Mlp(embedding_dim, hidden, 1);
    net_.init(rng);
}

double ExpertClassifier::logit(const Vec& embedding) const {
    if (embedding.size() != embedding_dim_)
        throw ValidationError("classifier: embedding dimension mismatch");
    return net_.forward(embedding.transpose())(0, 0);
}

double ExpertClassifier::prob(const Vec& embedding) const {
    return 1.0 / (1.0 + std::exp(-logit(embedding)));
}

}  // namespace sd
