#include "skilldisc/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "skilldisc/errors.hpp"
#include "skilldisc/networks.hpp"

namespace sd {

LabeledStateDataset collect_labeled_states(Environment& env, const GmmPolicy& expert_policy,
                                           int n_traj, int horizon, Rng& rng) {
    if (expert_policy.state_dim() != env.spec().state_dim ||
        expert_policy.action_dim() != env.spec().action_dim)
        throw ValidationError("expert policy dimensions do not match the environment");

    LabeledStateDataset ds;
    ds.samples.reserve(static_cast<std::size_t>(2 * n_traj * horizon));

    for (int label = 1; label >= 0; --label) {
        for (int traj = 0; traj < n_traj; ++traj) {
            Vec state = env.reset(rng);
            for (int t = 0; t < horizon; ++t) {
                Vec action(env.spec().action_dim);
                if (label == 1) {
                    action = expert_policy.sample(state, 0, GmmPolicy::Mode::Stochastic, rng);
                } else {
                    for (int i = 0; i < action.size(); ++i)
                        action[i] = uniform(rng, std::nextafter(-1.0, 0.0), 1.0);
                }
                StepResult r = env.step(action);
                ds.samples.push_back({r.next_state, label});
                if (r.done) {
                    if (t + 1 < horizon) state = env.reset(rng);
                } else {
                    state = r.next_state;
                }
            }
        }
    }
    ds.fit_standardizer();
    return ds;
}

PretrainResult pretrain_encoder(const LabeledStateDataset& dataset, int embedding_dim,
                                const PretrainOptions& opts) {
    const int S = dataset.state_dim();
    if (dataset.samples.empty()) throw ValidationError("pretrain_encoder: empty dataset");
    if (embedding_dim >= S)
        throw ValidationError("pretrain_encoder: embedding_dim must be strictly below state_dim");

    Standardizer st = opts.standardize ? dataset.standardizer : Standardizer::identity(S);
    Mat X = st.apply(dataset.states());
    std::vector<int> y = dataset.labels();

    // Stratified 80/20 split, deterministic given the seed.
    Rng rng = make_rng(opts.seed, "pretrain/split");
    std::vector<int> train_idx, test_idx;
    for (int label = 0; label <= 1; ++label) {
        std::vector<int> idx;
        for (int i = 0; i < static_cast<int>(y.size()); ++i)
            if (y[static_cast<std::size_t>(i)] == label) idx.push_back(i);
        std::shuffle(idx.begin(), idx.end(), rng);
        auto cut = static_cast<std::size_t>(
            std::llround(static_cast<double>(idx.size()) * opts.holdout_fraction));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < cut ? test_idx : train_idx).push_back(idx[i]);
    }

    auto take = [&](const std::vector<int>& which, Mat& Xs, Mat& ys) {
        Xs.resize(static_cast<Eigen::Index>(which.size()), S);
        ys.resize(static_cast<Eigen::Index>(which.size()), 1);
        for (std::size_t i = 0; i < which.size(); ++i) {
            Xs.row(static_cast<Eigen::Index>(i)) = X.row(which[i]);
            ys(static_cast<Eigen::Index>(i), 0) = y[static_cast<std::size_t>(which[i])];
        }
    };
    Mat X_train, y_train, X_test, y_test;
    take(train_idx, X_train, y_train);
    take(test_idx, X_test, y_test);

    Rng net_rng = make_rng(opts.seed, "pretrain/init");
    // chi is stored transposed (S x E) so the batched projection is X * chi_t.
    Mat chi_t(S, embedding_dim);
    double scale = std::sqrt(1.0 / static_cast<double>(S));
    for (Eigen::Index i = 0; i < chi_t.rows(); ++i)
        for (Eigen::Index j = 0; j < chi_t.cols(); ++j) chi_t(i, j) = normal(net_rng) * scale;
    ExpertClassifier clf(embedding_dim, opts.classifier_hidden, net_rng);

    Adam opt(opts.lr);
    std::vector<double> loss_trace;
    double best_loss = std::numeric_limits<double>::infinity();
    int steps_since_best = 0;
    int step = 0;
    for (; step < opts.max_steps; ++step) {
        ad::Tape tape;
        ad::Tape::Var chi_var = tape.leaf(chi_t);
        ad::Tape::Var e = tape.matmul(tape.constant(X_train), chi_var);
        auto clf_params = clf.net().params_on(tape);
        ad::Tape::Var logit = clf.net().forward(tape, e, clf_params);
        // BCE from logits: mean(softplus(l) - y * l).
        ad::Tape::Var loss = tape.mean(
            tape.sub(tape.softplus(logit), tape.mul(tape.constant(y_train), logit)));
        double loss_val = tape.val(loss)(0, 0);
        if (!std::isfinite(loss_val)) throw NumericalError("pretrain_encoder: non-finite loss");
        loss_trace.push_back(loss_val);
        tape.backward(loss);

        std::vector<Mat*> params{&chi_t};
        std::vector<const Mat*> grads{&tape.grad(chi_var)};
        for (std::size_t i = 0; i < clf_params.size(); ++i) {
            params.push_back(clf.net().params()[i]);
            grads.push_back(&tape.grad(clf_params[i]));
        }
        opt.step(params, grads);

        if (loss_val < best_loss - opts.min_improvement) {
            best_loss = loss_val;
            steps_since_best = 0;
        } else if (++steps_since_best >= opts.patience) {
            ++step;
            break;
        }
    }

    PretrainResult out;
    out.projection.chi = chi_t.transpose();
    out.projection.standardizer = st;
    out.projection.standardize_enabled = opts.standardize;
    out.steps = step;
    out.loss_trace = std::move(loss_trace);

    // Held-out accuracy of the (about to be discarded) classifier.
    if (X_test.rows() > 0) {
        Mat logits = clf.net().forward(X_test * chi_t);
        long correct = 0;
        for (Eigen::Index i = 0; i < logits.rows(); ++i)
            correct += ((logits(i, 0) > 0.0) == (y_test(i, 0) > 0.5)) ? 1 : 0;
        out.held_out_accuracy = static_cast<double>(correct) / static_cast<double>(logits.rows());
    }
    return out;
}

}  // namespace sd
