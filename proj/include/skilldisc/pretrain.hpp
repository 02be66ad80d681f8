#pragma once

#include "skilldisc/env.hpp"
#include "skilldisc/policy.hpp"
#include "skilldisc/projection.hpp"

namespace sd {

// Rolls out n_traj trajectories with the reference policy (label 1) and
// n_traj with uniform random actions (label 0), each of length `horizon`,
// pools the visited states and fits the standardizer.
LabeledStateDataset collect_labeled_states(Environment& env, const GmmPolicy& expert_policy,
                                           int n_traj, int horizon, Rng& rng);

struct PretrainResult {
    LinearProjection projection;
    double held_out_accuracy = 0.0;
    int steps = 0;
    std::vector<double> loss_trace;  // full-batch training loss per step
};

struct PretrainOptions {
    double lr = 3e-4;
    int max_steps = 20000;
    double min_improvement = 1e-5;  // over `patience` steps
    int patience = 50;
    double holdout_fraction = 0.2;  // stratified by label
    std::vector<int> classifier_hidden = {300, 300};
    std::uint64_t seed = 0;
    bool standardize = true;
};

// Jointly trains the linear projection chi and the binary expert classifier
// h_psi on full-batch cross-entropy; the classifier is discarded and only chi
// plus the standardizer are returned. Requires embedding_dim < state_dim.
PretrainResult pretrain_encoder(const LabeledStateDataset& dataset, int embedding_dim,
                                const PretrainOptions& opts);

}  // namespace sd
