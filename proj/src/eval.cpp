#include "skilldisc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "skilldisc/errors.hpp"

namespace sd {

Trajectory deterministic_rollout(const GmmPolicy& policy, Environment& env, int skill, int horizon,
                                 Rng& rng) {
    Trajectory traj;
    Vec state = env.reset(rng);
    traj.states.push_back(state);
    for (int t = 0; t < horizon; ++t) {
        Vec action = policy.sample(state, skill, GmmPolicy::Mode::Deterministic, rng);
        StepResult r = env.step(action);
        traj.states.push_back(r.next_state);
        traj.extrinsic_return += r.extrinsic_reward;
        if (r.done) break;
        state = r.next_state;
    }
    return traj;
}

double displacement(const Trajectory& traj, int axis_index) {
    if (traj.states.empty()) throw ValidationError("displacement: empty trajectory");
    if (axis_index < 0 || axis_index >= traj.states.front().size())
        throw ValidationError("displacement: axis index out of range");
    return traj.states.back()[axis_index] - traj.states.front()[axis_index];
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const auto n = sorted.size();
    if (n == 1) return sorted[0];
    double h = p * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, n - 1);
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

FiveNumberSummary displacement_stats(const std::vector<double>& displacements) {
    if (displacements.empty()) throw ValidationError("displacement_stats: empty input");
    std::vector<double> sorted = displacements;
    std::sort(sorted.begin(), sorted.end());
    FiveNumberSummary s;
    s.min = sorted.front();
    s.q25 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.50);
    s.q75 = quantile_sorted(sorted, 0.75);
    s.max = sorted.back();
    return s;
}

Vec feature_importance(const LinearProjection& proj) {
    Vec norms(proj.state_dim());
    for (int j = 0; j < proj.state_dim(); ++j) norms[j] = proj.chi.col(j).norm();
    double total = norms.sum();
    if (total > 0.0) norms /= total;
    return norms;
}

void visitation_export(const std::vector<std::vector<Trajectory>>& per_skill,
                       const LinearProjection& proj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot open '" + path + "' for writing");
    out << "skill,rollout,step";
    for (int j = 0; j < proj.state_dim(); ++j) out << ",s" << j;
    for (int j = 0; j < proj.embedding_dim(); ++j) out << ",e" << j;
    out << "\n";
    out.precision(17);
    for (std::size_t z = 0; z < per_skill.size(); ++z) {
        if (per_skill[z].empty())
            throw ValidationError("visitation_export: every skill needs at least one rollout");
        for (std::size_t r = 0; r < per_skill[z].size(); ++r) {
            const auto& traj = per_skill[z][r];
            for (std::size_t t = 0; t < traj.states.size(); ++t) {
                Vec e = proj.encode_raw(traj.states[t]);
                out << z << "," << r << "," << t;
                for (int j = 0; j < traj.states[t].size(); ++j) out << "," << traj.states[t][j];
                for (int j = 0; j < e.size(); ++j) out << "," << e[j];
                out << "\n";
            }
        }
    }
}

void return_curves(const std::vector<std::vector<std::vector<double>>>& per_seed,
                   const std::string& path) {
    if (per_seed.empty() || per_seed[0].empty())
        throw ValidationError("return_curves: need at least one seed and one epoch");
    const std::size_t epochs = per_seed[0].size();
    const std::size_t skills = per_seed[0][0].size();
    for (const auto& seed : per_seed) {
        if (seed.size() != epochs) throw ValidationError("return_curves: epoch count mismatch");
        for (const auto& epoch : seed)
            if (epoch.size() != skills)
                throw ValidationError("return_curves: skill count mismatch across epochs");
    }

    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot open '" + path + "' for writing");
    out << "epoch,max_mean,max_std,mean_mean,mean_std,min_mean,min_std\n";
    out.precision(17);
    auto mean_std = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        var /= static_cast<double>(v.size());
        return std::pair<double, double>(m, std::sqrt(var));
    };
    for (std::size_t e = 0; e < epochs; ++e) {
        std::vector<double> maxs, means, mins;
        for (const auto& seed : per_seed) {
            const auto& r = seed[e];
            maxs.push_back(*std::max_element(r.begin(), r.end()));
            mins.push_back(*std::min_element(r.begin(), r.end()));
            double m = 0.0;
            for (double x : r) m += x;
            means.push_back(m / static_cast<double>(r.size()));
        }
        auto [mx, sx] = mean_std(maxs);
        auto [mm, sm] = mean_std(means);
        auto [mn, sn] = mean_std(mins);
        out << e << "," << mx << "," << sx << "," << mm << "," << sm << "," << mn << "," << sn
            << "\n";
    }
}

}  // namespace sd
