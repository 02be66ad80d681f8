#include "skilldisc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skilldisc/errors.hpp"

namespace sd {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

double logsumexp(const Vec& x) {
    double m = x.maxCoeff();
    return m + std::log((x.array() - m).exp().sum());
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// log(1 - tanh(u)^2) in cancellation-free form.
double log_one_minus_tanh_sq(double u) {
    return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

// tanh that stays strictly inside (-1, 1): for |u| >= ~19 the double result
// would round to exactly +-1, which downstream open-interval checks reject.
double squash(double u) {
    const double bound = std::nextafter(1.0, 0.0);
    return std::clamp(std::tanh(u), -bound, bound);
}

}  // namespace

Vec gumbel_softmax(const Vec& logits, double temperature, Rng& rng) {
    if (temperature <= 0.0) throw ValidationError("gumbel_softmax: temperature must be > 0");
    Vec z(logits.size());
    for (int i = 0; i < logits.size(); ++i) {
        double g = -std::log(-std::log(uniform(rng, 1e-300, 1.0)));
        z[i] = (logits[i] + g) / temperature;
    }
    double lse = logsumexp(z);
    return (z.array() - lse).exp();
}

GmmPolicy::GmmPolicy(int state_dim, int action_dim, int num_skills, int n_components,
                     const std::vector<int>& hidden, double gumbel_temperature, Rng& rng)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      num_skills_(num_skills),
      n_components_(n_components),
      gumbel_temperature_(gumbel_temperature) {
    if (n_components < 1) throw ValidationError("policy needs at least one mixture component");
    if (gumbel_temperature <= 0.0) throw ValidationError("gumbel temperature must be > 0");
    int head_dim = n_components * (1 + 2 * action_dim);
    net_ = Mlp(state_dim + num_skills, hidden, head_dim);
    net_.init(rng);
}

Vec GmmPolicy::make_obs(const Vec& state, int skill) const {
    if (state.size() != state_dim_) throw ValidationError("policy: state dimension mismatch");
    if (skill < 0 || skill >= num_skills_) throw ValidationError("policy: skill index out of range");
    Vec obs = Vec::Zero(obs_dim());
    obs.head(state_dim_) = state;
    obs[state_dim_ + skill] = 1.0;
    return obs;
}

GmmPolicy::Head GmmPolicy::head(const Vec& obs) const {
    Mat out = net_.forward(obs.transpose());
    Head h;
    h.logits = out.row(0).segment(0, n_components_);
    h.means.resize(n_components_, action_dim_);
    h.log_stds.resize(n_components_, action_dim_);
    int base_mu = n_components_;
    int base_ls = n_components_ + n_components_ * action_dim_;
    for (int k = 0; k < n_components_; ++k) {
        h.means.row(k) = out.row(0).segment(base_mu + k * action_dim_, action_dim_);
        h.log_stds.row(k) = out.row(0)
                                .segment(base_ls + k * action_dim_, action_dim_)
                                .cwiseMax(kLogStdMin)
                                .cwiseMin(kLogStdMax);
    }
    return h;
}

Vec GmmPolicy::sample(const Vec& state, int skill, Mode mode, Rng& rng, Vec* pre_squash) const {
    Head h = head(make_obs(state, skill));
    Vec u(action_dim_);
    if (mode == Mode::Deterministic) {
        int best = 0;
        h.logits.maxCoeff(&best);
        u = h.means.row(best);
    } else {
        // Categorical draw over softmax(logits), then the component Gaussian.
        Vec w = (h.logits.array() - logsumexp(h.logits)).exp();
        double r = uniform(rng, 0.0, 1.0);
        int k = 0;
        double acc = 0.0;
        for (; k < n_components_ - 1; ++k) {
            acc += w[k];
            if (r < acc) break;
        }
        for (int i = 0; i < action_dim_; ++i)
            u[i] = h.means(k, i) + std::exp(h.log_stds(k, i)) * normal(rng);
    }
    if (pre_squash) *pre_squash = u;
    return u.unaryExpr([](double x) { return squash(x); });
}

double GmmPolicy::log_prob_presquash(const Vec& state, int skill, const Vec& u) const {
    if (u.size() != action_dim_) throw ValidationError("policy: action dimension mismatch");
    Head h = head(make_obs(state, skill));
    Vec log_w = h.logits.array() - logsumexp(h.logits);
    Vec comp(n_components_);
    for (int k = 0; k < n_components_; ++k) {
        double lp = -0.5 * action_dim_ * kLogTwoPi;
        for (int i = 0; i < action_dim_; ++i) {
            double z = (u[i] - h.means(k, i)) * std::exp(-h.log_stds(k, i));
            lp += -h.log_stds(k, i) - 0.5 * z * z;
        }
        comp[k] = log_w[k] + lp;
    }
    double correction = 0.0;
    for (int i = 0; i < action_dim_; ++i) correction += log_one_minus_tanh_sq(u[i]);
    return logsumexp(comp) - correction;
}

void GmmPolicy::sample_batch(const Mat& obs, Rng& rng, Mat& actions, Vec& log_probs) const {
    const int B = static_cast<int>(obs.rows());
    Mat out = net_.forward(obs);
    actions.resize(B, action_dim_);
    log_probs.resize(B);
    int base_mu = n_components_;
    int base_ls = n_components_ + n_components_ * action_dim_;
    for (int b = 0; b < B; ++b) {
        Vec logits = out.row(b).segment(0, n_components_);
        Vec log_w = logits.array() - logsumexp(logits);
        Vec w = log_w.array().exp();
        double r = uniform(rng, 0.0, 1.0);
        int k = 0;
        double acc = 0.0;
        for (; k < n_components_ - 1; ++k) {
            acc += w[k];
            if (r < acc) break;
        }
        Vec u(action_dim_);
        for (int i = 0; i < action_dim_; ++i) {
            double mu = out(b, base_mu + k * action_dim_ + i);
            double ls = std::clamp(out(b, base_ls + k * action_dim_ + i), kLogStdMin, kLogStdMax);
            u[i] = mu + std::exp(ls) * normal(rng);
        }
        // Mixture density at the drawn pre-squash action.
        Vec comp(n_components_);
        for (int kk = 0; kk < n_components_; ++kk) {
            double lp = -0.5 * action_dim_ * kLogTwoPi;
            for (int i = 0; i < action_dim_; ++i) {
                double mu = out(b, base_mu + kk * action_dim_ + i);
                double ls = std::clamp(out(b, base_ls + kk * action_dim_ + i), kLogStdMin, kLogStdMax);
                double z = (u[i] - mu) * std::exp(-ls);
                lp += -ls - 0.5 * z * z;
            }
            comp[kk] = log_w[kk] + lp;
        }
        double correction = 0.0;
        for (int i = 0; i < action_dim_; ++i) correction += log_one_minus_tanh_sq(u[i]);
        log_probs[b] = logsumexp(comp) - correction;
        actions.row(b) = u.unaryExpr([](double x) { return squash(x); });
    }
}

GmmPolicy::TapeSample GmmPolicy::reparam_sample(ad::Tape& tape, ad::Tape::Var obs,
                                                const std::vector<ad::Tape::Var>& params,
                                                Rng& rng) const {
    const int B = static_cast<int>(tape.val(obs).rows());
    ad::Tape::Var out = net_.forward(tape, obs, params);
    ad::Tape::Var logits = tape.slice_cols(out, 0, n_components_);
    int base_mu = n_components_;
    int base_ls = n_components_ + n_components_ * action_dim_;

    // Gumbel-Softmax over components.
    Mat gumbel(B, n_components_);
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < n_components_; ++k)
            gumbel(b, k) = -std::log(-std::log(uniform(rng, 1e-300, 1.0)));
    ad::Tape::Var soft = tape.softmax_rows(
        tape.scale(tape.add(logits, tape.constant(gumbel)), 1.0 / gumbel_temperature_));
    // Straight-through: the forward value is the hard one-hot of the relaxed
    // draw while gradients follow the soft weights. Mixing component samples
    // with fractional weights would place u between the component means, where
    // the mixture density can be made arbitrarily small -- an unbounded
    // entropy bonus the policy update would otherwise exploit.
    Mat soft_val = tape.val(soft);
    Mat hard_delta = Mat::Zero(B, n_components_);
    for (int b = 0; b < B; ++b) {
        int best = 0;
        soft_val.row(b).maxCoeff(&best);
        hard_delta(b, best) = 1.0;
        hard_delta.row(b) -= soft_val.row(b);
    }
    ad::Tape::Var weights = tape.add(soft, tape.constant(hard_delta));

    // Gaussian reparametrization per component, mixed by the soft weights.
    ad::Tape::Var u = -1;
    for (int k = 0; k < n_components_; ++k) {
        ad::Tape::Var mu = tape.slice_cols(out, base_mu + k * action_dim_, action_dim_);
        ad::Tape::Var ls =
            tape.clamp(tape.slice_cols(out, base_ls + k * action_dim_, action_dim_), kLogStdMin,
                       kLogStdMax);
        Mat eps(B, action_dim_);
        for (int b = 0; b < B; ++b)
            for (int i = 0; i < action_dim_; ++i) eps(b, i) = normal(rng);
        ad::Tape::Var u_k = tape.add(mu, tape.mul(tape.exp(ls), tape.constant(eps)));
        ad::Tape::Var weighted = tape.mul_col(u_k, tape.slice_cols(weights, k, 1));
        u = (u < 0) ? weighted : tape.add(u, weighted);
    }

    TapeSample s;
    s.action = tape.tanh(u);
    s.log_prob = log_prob_on_tape(tape, out, u);
    return s;
}

ad::Tape::Var GmmPolicy::log_prob_on_tape(ad::Tape& tape, ad::Tape::Var head_out,
                                          ad::Tape::Var u) const {
    ad::Tape::Var logits = tape.slice_cols(head_out, 0, n_components_);
    ad::Tape::Var log_w = tape.log_softmax_rows(logits);
    int base_mu = n_components_;
    int base_ls = n_components_ + n_components_ * action_dim_;

    std::vector<ad::Tape::Var> comp_terms;
    for (int k = 0; k < n_components_; ++k) {
        ad::Tape::Var mu = tape.slice_cols(head_out, base_mu + k * action_dim_, action_dim_);
        ad::Tape::Var ls =
            tape.clamp(tape.slice_cols(head_out, base_ls + k * action_dim_, action_dim_),
                       kLogStdMin, kLogStdMax);
        ad::Tape::Var z = tape.mul(tape.sub(u, mu), tape.exp(tape.neg(ls)));
        ad::Tape::Var per_dim = tape.sub(tape.neg(ls), tape.scale(tape.square(z), 0.5));
        ad::Tape::Var lp =
            tape.add_scalar(tape.rowsum(per_dim), -0.5 * action_dim_ * kLogTwoPi);
        comp_terms.push_back(tape.add(tape.slice_cols(log_w, k, 1), lp));
    }
    ad::Tape::Var mixture = tape.logsumexp_rows(tape.concat_cols(comp_terms));

    // Squash correction: sum_i log(1 - tanh(u_i)^2), stable form.
    ad::Tape::Var corr_per_dim = tape.scale(
        tape.sub(tape.add_scalar(tape.neg(u), std::numbers::ln2),
                 tape.softplus(tape.scale(u, -2.0))),
        2.0);
    return tape.sub(mixture, tape.rowsum(corr_per_dim));
}

}  // namespace sd
