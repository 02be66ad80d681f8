#pragma once

#include <string>
#include <vector>

#include "skilldisc/env.hpp"
#include "skilldisc/policy.hpp"
#include "skilldisc/projection.hpp"

namespace sd {

struct Trajectory {
    std::vector<Vec> states;  // initial state plus one per step
    double extrinsic_return = 0.0;
};

// Rolls out the deterministic action mode (tanh of the highest-weight
// component mean) for up to `horizon` steps; stops early on terminal.
Trajectory deterministic_rollout(const GmmPolicy& policy, Environment& env, int skill, int horizon,
                                 Rng& rng);

// Final minus initial position along one state coordinate.
double displacement(const Trajectory& traj, int axis_index);

struct FiveNumberSummary {
    double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

// Linear-interpolation quantiles over the raw values.
FiveNumberSummary displacement_stats(const std::vector<double>& displacements);

// Per-feature aggregate projection weight: L2 norm over the embedding rows of
// each state-feature column, normalized to sum to 1.
Vec feature_importance(const LinearProjection& proj);

// CSV rows (skill, rollout, step, state..., embedding...) where the embedding
// is the projection of the standardized state.
void visitation_export(const std::vector<std::vector<Trajectory>>& per_skill,
                       const LinearProjection& proj, const std::string& path);

// Per-epoch max/mean/min of per-skill returns; with several seeds, the CSV
// carries mean and standard deviation across seeds for each aggregate.
// per_seed[seed][epoch][skill] = return. Epoch/skill counts must agree.
void return_curves(const std::vector<std::vector<std::vector<double>>>& per_seed,
                   const std::string& path);

}  // namespace sd
