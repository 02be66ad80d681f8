#include <doctest.h>

#include <cmath>

#include "skilldisc/errors.hpp"
#include "skilldisc/networks.hpp"
#include "skilldisc/policy.hpp"
#include "skilldisc/projection.hpp"

using namespace sd;

namespace {

void zero_params(Mlp& net) {
    for (Mat* p : net.params()) p->setZero();
}

}  // namespace

TEST_CASE("mlp forward matches a hand-rolled matrix oracle") {
    Rng rng = make_rng(21, "test/mlp");
    Mlp net(4, {5, 6}, 3);
    net.init(rng);
    Mat X(2, 4);
    X << 0.1, -0.2, 0.3, 0.4, -1.0, 0.5, 0.0, 2.0;

    auto params = net.params();
    REQUIRE(params.size() == 6);  // W0 b0 W1 b1 W2 b2
    Mat h = X * (*params[0]);
    h.rowwise() += params[1]->row(0);
    h = h.cwiseMax(0.0);
    h = h * (*params[2]);
    h.rowwise() += params[3]->row(0);
    h = h.cwiseMax(0.0);
    Mat expect = h * (*params[4]);
    expect.rowwise() += params[5]->row(0);

    CHECK((net.forward(X) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mlp with zero weights outputs its final bias") {
    Rng rng = make_rng(22, "test/mlp");
    Mlp net(3, {4}, 2);
    net.init(rng);
    zero_params(net);
    auto params = net.params();
    (*params.back())(0, 0) = 1.5;
    (*params.back())(0, 1) = -2.5;
    Mat out = net.forward(Mat::Random(5, 3));
    for (int i = 0; i < 5; ++i) {
        CHECK(out(i, 0) == 1.5);
        CHECK(out(i, 1) == -2.5);
    }
}

TEST_CASE("single-component log-prob equals the standard normal density at its mode") {
    Rng rng = make_rng(23, "test/policy");
    // No hidden layers and zero parameters: logits 0, mean 0, log-std 0.
    GmmPolicy p1(1, 1, 1, 1, {}, 1.0, rng);
    zero_params(p1.net());
    Vec state = Vec::Zero(1), u = Vec::Zero(1);
    CHECK(p1.log_prob_presquash(state, 0, u) ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-9));

    GmmPolicy p2(1, 2, 1, 1, {}, 1.0, rng);
    zero_params(p2.net());
    Vec u2 = Vec::Zero(2);
    CHECK(p2.log_prob_presquash(state, 0, u2) ==
          doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-9));
}

TEST_CASE("squashed mixture density integrates to one") {
    Rng rng = make_rng(24, "test/policy");
    GmmPolicy policy(2, 1, 3, 3, {8}, 1.0, rng);
    Vec state(2);
    state << 0.3, -0.5;
    // Total mass of the action density: substitute a = tanh(u), so
    // integral of exp(log_prob(u)) * (1 - tanh(u)^2) du over the real line.
    double mass = 0.0;
    const double h = 0.005, lim = 45.0;
    for (double u = -lim; u <= lim; u += h) {
        Vec uv(1);
        uv << u;
        double t = std::tanh(u);
        mass += std::exp(policy.log_prob_presquash(state, 1, uv)) * (1.0 - t * t) * h;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("gumbel softmax limits and sampling statistics") {
    Rng rng = make_rng(25, "test/gumbel");
    Vec logits(2);
    logits << 20.0, -20.0;
    Vec out = gumbel_softmax(logits, 0.1, rng);
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(out[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-4));
    CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-12));

    // Very high temperature drives the output to the uniform simplex point.
    Vec logits4 = Vec::Zero(4);
    for (int i = 0; i < 20; ++i) {
        Vec hot = gumbel_softmax(logits4, 1e7, rng);
        for (int k = 0; k < 4; ++k) CHECK(hot[k] == doctest::Approx(0.25).epsilon(1e-3));
    }

    // Equal logits: the mean sampled simplex point is uniform (Monte Carlo).
    const int n = 100000;
    Vec mean = Vec::Zero(4);
    Vec sq = Vec::Zero(4);
    for (int i = 0; i < n; ++i) {
        Vec s = gumbel_softmax(logits4, 1.0, rng);
        mean += s;
        sq += s.cwiseProduct(s);
    }
    mean /= n;
    for (int k = 0; k < 4; ++k) {
        double var = sq[k] / n - mean[k] * mean[k];
        double se = std::sqrt(var / n);
        CHECK(std::abs(mean[k] - 0.25) < 5.0 * se);
    }

    CHECK_THROWS_AS(gumbel_softmax(logits, 0.0, rng), ValidationError);
    CHECK_THROWS_AS(gumbel_softmax(logits, -1.0, rng), ValidationError);
}

TEST_CASE("sampled actions always lie strictly inside (-1, 1)") {
    Rng rng = make_rng(26, "test/policy");
    GmmPolicy policy(2, 2, 4, 4, {16}, 1.0, rng);
    Vec state(2);
    for (int i = 0; i < 2000; ++i) {
        state << uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0);
        Vec a = policy.sample(state, i % 4, GmmPolicy::Mode::Stochastic, rng);
        for (int j = 0; j < 2; ++j) {
            CHECK(a[j] > -1.0);
            CHECK(a[j] < 1.0);
        }
    }
}

TEST_CASE("degenerate single component with tiny std samples near tanh(mean)") {
    Rng rng = make_rng(27, "test/policy");
    GmmPolicy policy(1, 1, 1, 1, {}, 1.0, rng);
    zero_params(policy.net());
    auto params = policy.net().params();
    // Head layout: [logit, mean, log_std].
    (*params.back())(0, 2) = -18.0;  // tiny std
    Vec state = Vec::Zero(1);
    Vec a = policy.sample(state, 0, GmmPolicy::Mode::Stochastic, rng);
    CHECK(std::abs(a[0]) < 1e-6);

    // Mean far in the saturated zone: stochastic samples hug the bound.
    (*params.back())(0, 1) = 10.0;
    for (int i = 0; i < 50; ++i) {
        Vec big = policy.sample(state, 0, GmmPolicy::Mode::Stochastic, rng);
        CHECK(big[0] > 0.999);
        CHECK(big[0] < 1.0);
    }
}

TEST_CASE("deterministic mode is repeatable and invariant to logit rescaling") {
    Rng rng = make_rng(28, "test/policy");
    GmmPolicy policy(1, 1, 1, 4, {}, 1.0, rng);
    zero_params(policy.net());
    auto params = policy.net().params();
    Mat& bias = *params.back();
    // logits then means then log-stds, 4 components each.
    bias(0, 0) = 0.5;
    bias(0, 1) = 2.0;
    bias(0, 2) = 1.0;
    bias(0, 3) = 0.1;
    bias(0, 4) = -0.3;
    bias(0, 5) = 0.7;
    bias(0, 6) = 0.2;
    bias(0, 7) = -0.8;

    Vec state = Vec::Zero(1);
    Vec a1 = policy.sample(state, 0, GmmPolicy::Mode::Deterministic, rng);
    Vec a2 = policy.sample(state, 0, GmmPolicy::Mode::Deterministic, rng);
    CHECK(a1[0] == a2[0]);
    CHECK(a1[0] == doctest::Approx(std::tanh(0.7)));  // component 1 has the top logit

    // Positive rescaling of the logits keeps the argmax component.
    for (int k = 0; k < 4; ++k) bias(0, k) *= 3.0;
    Vec a3 = policy.sample(state, 0, GmmPolicy::Mode::Deterministic, rng);
    CHECK(a3[0] == a1[0]);
}

TEST_CASE("reparameterized sample gradient matches the tanh derivative") {
    Rng rng = make_rng(29, "test/policy");
    GmmPolicy policy(1, 1, 1, 1, {}, 1.0, rng);
    zero_params(policy.net());
    auto net_params = policy.net().params();
    const double mu = 0.7;
    (*net_params.back())(0, 1) = mu;
    (*net_params.back())(0, 2) = -18.0;  // noise is negligible

    ad::Tape tape;
    Mat obs = Mat::Zero(64, 2);
    obs.col(1).setOnes();  // one-hot skill for K=1
    ad::Tape::Var obs_var = tape.constant(obs);
    auto params = policy.net().params_on(tape);
    auto sample = policy.reparam_sample(tape, obs_var, params, rng);
    ad::Tape::Var loss = tape.mean(sample.action);
    CHECK(tape.val(loss)(0, 0) == doctest::Approx(std::tanh(mu)).epsilon(1e-6));
    tape.backward(loss);

    // d mean(tanh(mu + sigma*eps)) / d mu with sigma ~ 1e-8 is 1 - tanh(mu)^2.
    double grad_mu = tape.grad(params.back())(0, 1);
    CHECK(grad_mu == doctest::Approx(1.0 - std::tanh(mu) * std::tanh(mu)).epsilon(1e-6));
}

TEST_CASE("tape log-prob agrees with the scalar log-prob") {
    Rng rng = make_rng(30, "test/policy");
    GmmPolicy policy(2, 2, 3, 4, {12}, 1.0, rng);
    Vec state(2);
    state << 0.4, -1.2;
    Vec u(2);
    u << 0.3, -0.9;

    ad::Tape tape;
    Mat obs_row = policy.make_obs(state, 2).transpose();
    auto params = policy.net().params_on(tape, /*trainable=*/false);
    ad::Tape::Var head = policy.net().forward(tape, tape.constant(obs_row), params);
    ad::Tape::Var lp = policy.log_prob_on_tape(tape, head, tape.constant(u.transpose()));
    CHECK(tape.val(lp)(0, 0) ==
          doctest::Approx(policy.log_prob_presquash(state, 2, u)).epsilon(1e-10));
}

TEST_CASE("discriminator outputs normalized log-probabilities") {
    Rng rng = make_rng(31, "test/disc");
    SkillDiscriminator disc(1, 50, {16}, rng);
    zero_params(disc.net());
    Vec e(1);
    e << 0.3;
    Vec lp = disc.log_probs(e);
    REQUIRE(lp.size() == 50);
    for (int k = 0; k < 50; ++k)
        CHECK(lp[k] == doctest::Approx(std::log(1.0 / 50.0)).epsilon(1e-12));

    SkillDiscriminator random_disc(2, 7, {16}, rng);
    for (int i = 0; i < 20; ++i) {
        Vec x(2);
        x << normal(rng), normal(rng);
        Vec l = random_disc.log_probs(x);
        CHECK(l.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(random_disc.log_prob(x, 3) == doctest::Approx(l[3]));
    }
}

TEST_CASE("classifier probability is a sigmoid of its logit") {
    Rng rng = make_rng(32, "test/clf");
    ExpertClassifier clf(2, {8}, rng);
    zero_params(clf.net());
    Vec e = Vec::Zero(2);
    CHECK(clf.prob(e) == 0.5);

    auto params = clf.net().params();
    (*params.back())(0, 0) = 20.0;
    CHECK(clf.prob(e) > 0.999);
    CHECK(clf.prob(e) < 1.0);

    ExpertClassifier rnd(3, {8, 8}, rng);
    for (int i = 0; i < 20; ++i) {
        Vec x(3);
        x << normal(rng), normal(rng), normal(rng);
        double logit = rnd.net().forward(x.transpose())(0, 0);
        CHECK(rnd.logit(x) == doctest::Approx(logit).epsilon(1e-12));
        CHECK(rnd.prob(x) == doctest::Approx(1.0 / (1.0 + std::exp(-logit))).epsilon(1e-9));
    }
}

TEST_CASE("projection encode: selection, arithmetic, linearity, null space") {
    LinearProjection proj;
    proj.chi = Mat(1, 2);
    proj.chi << 1.0, 0.0;
    proj.standardizer = Standardizer::identity(2);
    proj.standardize_enabled = false;
    Vec s(2);
    s << 0.3, 0.9;
    CHECK(proj.encode_raw(s)[0] == 0.3);

    LinearProjection half;
    half.chi = Mat(1, 2);
    half.chi << 0.5, 0.5;
    half.standardizer = Standardizer::identity(2);
    half.standardize_enabled = false;
    Vec s2(2);
    s2 << 2.0, 4.0;
    CHECK(half.encode_raw(s2)[0] == 3.0);

    // Null-space direction of [1, 0] is (0, t): embeddings identical to the bit.
    Vec n(2);
    n << 0.0, 123.456;
    Vec s_plus_n = s + n;
    CHECK(proj.encode_raw(s_plus_n)[0] == proj.encode_raw(s)[0]);

    // Linearity.
    Rng rng = make_rng(33, "test/proj");
    LinearProjection rp;
    rp.chi = Mat(2, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j) rp.chi(i, j) = normal(rng);
    rp.standardizer = Standardizer::identity(4);
    rp.standardize_enabled = false;
    Vec x1(4), x2(4);
    for (int j = 0; j < 4; ++j) {
        x1[j] = normal(rng);
        x2[j] = normal(rng);
    }
    Vec combo = 2.5 * x1 - 0.75 * x2;
    Vec lhs = rp.encode_raw(combo);
    Vec rhs = 2.5 * rp.encode_raw(x1) - 0.75 * rp.encode_raw(x2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);

    // The identity projection is the baseline: raw state passthrough.
    LinearProjection id = LinearProjection::identity(3);
    Vec s3(3);
    s3 << 1.0, -2.0, 3.0;
    CHECK((id.encode_raw(s3) - s3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batched encode matches per-row encode") {
    Rng rng = make_rng(34, "test/proj");
    LinearProjection proj;
    proj.chi = Mat(2, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) proj.chi(i, j) = normal(rng);
    Mat states(5, 3);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 3; ++j) states(i, j) = normal(rng);
    proj.standardizer = Standardizer::fit(states);
    proj.standardize_enabled = true;

    Mat batched = proj.encode_raw(states);
    for (int i = 0; i < 5; ++i) {
        Vec row = proj.encode_raw(Vec(states.row(i)));
        CHECK((batched.row(i).transpose() - row).cwiseAbs().maxCoeff() < 1e-12);
    }
}
