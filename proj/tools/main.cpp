// Command-line workflow: train-ref -> collect -> fit-encoder -> train-skills
// -> eval, plus serve-maze for exercising the external-adapter wire protocol.
#include <CLI11.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "skilldisc/errors.hpp"
#include "skilldisc/eval.hpp"
#include "skilldisc/point_maze.hpp"
#include "skilldisc/pretrain.hpp"
#include "skilldisc/remote_env.hpp"
#include "skilldisc/skill.hpp"

namespace fs = std::filesystem;
using namespace sd;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

std::string default_out(const std::string& leaf) {
    const char* root = std::getenv("SKILLDISC_OUT");
    return (root ? std::string(root) : std::string("runs")) + "/" + leaf;
}

Config load_config(const CommonOpts& opts) {
    Config cfg = opts.config_path.empty() ? Config{} : Config::from_file(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.validate();
    return cfg;
}

std::unique_ptr<Environment> make_env(const Config& cfg) {
    if (cfg.state_dim != 2 || cfg.action_dim != 2)
        throw ConfigError(
            "the built-in environment is the 2D point maze (state_dim = action_dim = 2); "
            "attach other environments through the adapter protocol");
    return std::make_unique<PointMaze>(cfg.max_episode_steps, cfg.shared_reset_epsilon);
}

void write_sidecar_manifest(const std::string& path, const Config& cfg, long step) {
    Manifest m;
    m.config_hash = cfg.hash();
    m.seed = cfg.seed;
    m.step = step;
    write_manifest(path + ".manifest.txt", m);
}

int apply_steps_override(Config& cfg, std::optional<long> steps) {
    if (steps) {
        if (cfg.env_steps_per_epoch < 1) throw ConfigError("env_steps_per_epoch must be >= 1");
        cfg.epochs = static_cast<int>((*steps + cfg.env_steps_per_epoch - 1) / cfg.env_steps_per_epoch);
    }
    return cfg.epochs;
}

int cmd_train_ref(const CommonOpts& common, std::optional<long> steps) {
    Config cfg = load_config(common);
    apply_steps_override(cfg, steps);
    std::string out = common.out.empty() ? default_out("ref") : common.out;
    fs::create_directories(out);

    auto env = make_env(cfg);
    std::ofstream metrics(out + "/metrics.csv");
    metrics << "epoch,env_steps,q1_loss,q2_loss,policy_loss,mean_episode_return,eval_return\n";
    metrics.precision(17);

    long final_steps = 0;
    SacTrainer trainer = train_reference_policy(*env, cfg, [&](const RefEpochMetrics& m) {
        metrics << m.epoch << "," << m.env_steps << "," << m.q1_loss << "," << m.q2_loss << ","
                << m.policy_loss << "," << m.mean_episode_return << "," << m.eval_return << "\n";
        metrics.flush();
        final_steps = m.env_steps;
        std::cout << "epoch " << m.epoch << " env_steps " << m.env_steps << " eval_return "
                  << m.eval_return << std::endl;
    });
    trainer.save(out, final_steps);
    std::cout << "reference checkpoint written to " << out << std::endl;
    return 0;
}

int cmd_collect(const CommonOpts& common, const std::string& ref_dir, int n_traj, int horizon) {
    Config cfg = load_config(common);
    if (n_traj > 0) cfg.n_traj = n_traj;
    if (horizon > 0) cfg.max_episode_steps = horizon;
    std::string out = common.out.empty() ? default_out("dataset.bin") : common.out;

    auto env = make_env(cfg);
    SacTrainer ref = SacTrainer::load(ref_dir, cfg, /*num_skills=*/1);
    Rng rng = make_rng(cfg.seed, "collect");
    LabeledStateDataset ds =
        collect_labeled_states(*env, ref.policy(), cfg.n_traj, cfg.max_episode_steps, rng);

    if (out.size() > 4 && out.substr(out.size() - 4) == ".csv") ds.save_csv(out);
    else ds.save_binary(out);
    write_sidecar_manifest(out, cfg, static_cast<long>(ds.samples.size()));
    std::cout << "wrote " << ds.samples.size() << " labeled states to " << out << std::endl;
    return 0;
}

int cmd_fit_encoder(const CommonOpts& common, const std::string& dataset_path,
                    std::optional<int> embedding_dim) {
    Config cfg = load_config(common);
    if (embedding_dim) cfg.embedding_dim = *embedding_dim;
    std::string out = common.out.empty() ? default_out("projection.txt") : common.out;

    LabeledStateDataset ds;
    if (dataset_path.size() > 4 && dataset_path.substr(dataset_path.size() - 4) == ".csv")
        ds = LabeledStateDataset::load_csv(dataset_path);
    else
        ds = LabeledStateDataset::load_binary(dataset_path);
    if (ds.state_dim() != cfg.state_dim)
        throw ArtifactError("dataset state_dim does not match the configured state_dim");
    if (cfg.embedding_dim >= cfg.state_dim)
        throw ConfigError("embedding_dim must be strictly smaller than state_dim");

    PretrainOptions opts;
    opts.lr = cfg.lr_encoder;
    opts.classifier_hidden = cfg.hidden_sizes;
    opts.seed = cfg.seed;
    opts.standardize = cfg.standardize;
    PretrainResult res = pretrain_encoder(ds, cfg.embedding_dim, opts);
    res.projection.save(out);
    write_sidecar_manifest(out, cfg, res.steps);

    std::ofstream acc_csv(out + ".accuracy.csv");
    acc_csv << "held_out_accuracy,steps\n";
    acc_csv.precision(17);
    acc_csv << res.held_out_accuracy << "," << res.steps << "\n";
    std::printf("held-out accuracy: %.3f (%d steps)\n", res.held_out_accuracy, res.steps);
    std::cout << "projection written to " << out << std::endl;
    return 0;
}

int cmd_train_skills(const CommonOpts& common, const std::string& projection_path, bool baseline,
                     std::optional<int> skills, std::optional<long> steps, bool resume) {
    Config cfg = load_config(common);
    if (skills) cfg.num_skills = *skills;
    if (baseline) cfg.projection_enabled = false;
    int epochs = apply_steps_override(cfg, steps);
    std::string out = common.out.empty() ? default_out("skills") : common.out;
    fs::create_directories(out);

    LinearProjection proj;
    if (baseline) {
        proj = LinearProjection::identity(cfg.state_dim);
    } else {
        if (projection_path.empty())
            throw ConfigError("either --projection or --baseline is required");
        proj = LinearProjection::load(projection_path);
        if (proj.state_dim() != cfg.state_dim)
            throw ArtifactError("projection state_dim does not match the configured state_dim");
    }

    auto env = make_env(cfg);
    Rng net_rng = make_rng(cfg.seed, "skill/init");

    int start_epoch = 0;
    std::unique_ptr<SkillTrainer> trainer;
    if (resume) {
        trainer = std::make_unique<SkillTrainer>(SkillTrainer::load(out, cfg, proj));
        Manifest m = read_manifest(out + "/manifest.txt");
        start_epoch = cfg.env_steps_per_epoch > 0
                          ? static_cast<int>(m.step / cfg.env_steps_per_epoch)
                          : 0;
    } else {
        trainer = std::make_unique<SkillTrainer>(cfg, proj, net_rng);
    }

    std::ofstream metrics(out + "/metrics.csv", resume ? std::ios::app : std::ios::out);
    if (!resume)
        metrics << "epoch,env_steps,q1_loss,q2_loss,policy_loss,disc_loss,disc_acc,"
                   "mean_intrinsic_reward\n";
    metrics.precision(17);

    long env_steps = 0;
    for (int epoch = start_epoch; epoch < epochs; ++epoch) {
        SkillEpochMetrics m = trainer->run_epoch(*env, epoch);
        env_steps = m.env_steps;
        metrics << m.epoch << "," << m.env_steps << "," << m.q1_loss << "," << m.q2_loss << ","
                << m.policy_loss << "," << m.disc_loss << "," << m.disc_acc << ","
                << m.mean_intrinsic_reward << "\n";
        metrics.flush();
        std::cout << "epoch " << epoch << " env_steps " << m.env_steps << " disc_acc " << m.disc_acc
                  << " r_z " << m.mean_intrinsic_reward << std::endl;
        trainer->save(out, env_steps);
    }
    std::cout << "skill checkpoint written to " << out << std::endl;
    return 0;
}

int cmd_eval(const CommonOpts& common, const std::vector<std::string>& checkpoints, int axis,
             bool stochastic, int workers, std::optional<int> skills, int horizon, int rollouts) {
    Config cfg = load_config(common);
    if (skills) cfg.num_skills = *skills;
    if (rollouts > 0) cfg.eval_rollouts = rollouts;
    if (horizon <= 0) horizon = cfg.max_episode_steps;
    std::string out = common.out.empty() ? default_out("eval") : common.out;
    fs::create_directories(out);
    if (checkpoints.empty()) throw ConfigError("at least one --checkpoint is required");
    if (axis < 0 || axis >= cfg.state_dim) throw ConfigError("--axis out of range for state_dim");

    struct SeedResult {
        std::vector<double> axis_disp;  // one per (skill, rollout aggregate)
        std::vector<double> proj_disp;
    };
    std::vector<SeedResult> per_seed;
    LinearProjection proj;

    std::ofstream disp_csv(out + "/displacement.csv");
    disp_csv << "skill,seed,displacement,proj_displacement\n";
    disp_csv.precision(17);

    std::vector<std::vector<Trajectory>> last_per_skill;
    for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
        proj = LinearProjection::load(checkpoints[ci] + "/projection.txt");
        Config run_cfg = cfg;
        Manifest m = read_manifest(checkpoints[ci] + "/manifest.txt");
        run_cfg.seed = m.seed;
        SkillTrainer trainer = SkillTrainer::load(checkpoints[ci], run_cfg, proj);

        std::vector<std::vector<Trajectory>> per_skill(
            static_cast<std::size_t>(cfg.num_skills));
        auto roll_skill = [&](int z) {
            PointMaze env(cfg.max_episode_steps, cfg.shared_reset_epsilon);
            for (int r = 0; r < cfg.eval_rollouts; ++r) {
                Rng rng = make_rng(run_cfg.seed, "eval/skill" + std::to_string(z) + "/rollout" +
                                                     std::to_string(r));
                if (stochastic) {
                    Trajectory traj;
                    Vec s = env.reset(rng);
                    traj.states.push_back(s);
                    for (int t = 0; t < horizon; ++t) {
                        Vec a = trainer.sac().policy().sample(s, z, GmmPolicy::Mode::Stochastic, rng);
                        StepResult sr = env.step(a);
                        traj.states.push_back(sr.next_state);
                        traj.extrinsic_return += sr.extrinsic_reward;
                        if (sr.done) break;
                        s = sr.next_state;
                    }
                    per_skill[static_cast<std::size_t>(z)].push_back(std::move(traj));
                } else {
                    per_skill[static_cast<std::size_t>(z)].push_back(
                        deterministic_rollout(trainer.sac().policy(), env, z, horizon, rng));
                }
            }
        };
        if (workers > 1) {
            std::vector<std::thread> pool;
            std::atomic<int> next{0};
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&] {
                    for (int z = next.fetch_add(1); z < cfg.num_skills; z = next.fetch_add(1))
                        roll_skill(z);
                });
            for (auto& t : pool) t.join();
        } else {
            for (int z = 0; z < cfg.num_skills; ++z) roll_skill(z);
        }

        SeedResult sr;
        for (int z = 0; z < cfg.num_skills; ++z) {
            for (const auto& traj : per_skill[static_cast<std::size_t>(z)]) {
                double d = displacement(traj, axis);
                Vec e0 = proj.encode_raw(traj.states.front());
                Vec e1 = proj.encode_raw(traj.states.back());
                double pd = (e1 - e0)[0];
                sr.axis_disp.push_back(d);
                sr.proj_disp.push_back(pd);
                disp_csv << z << "," << run_cfg.seed << "," << d << "," << pd << "\n";
            }
        }
        per_seed.push_back(std::move(sr));
        last_per_skill = std::move(per_skill);
    }

    // Five-number summaries, mean +- std across seeds (Table-layout CSV).
    auto summarize = [&](auto pick) {
        std::vector<FiveNumberSummary> sums;
        for (const auto& sr : per_seed) sums.push_back(displacement_stats(pick(sr)));
        auto agg = [&](auto field) {
            double mean = 0.0;
            for (const auto& s : sums) mean += field(s);
            mean /= static_cast<double>(sums.size());
            double var = 0.0;
            for (const auto& s : sums) var += (field(s) - mean) * (field(s) - mean);
            var /= static_cast<double>(sums.size());
            return std::pair<double, double>(mean, std::sqrt(var));
        };
        return std::array<std::pair<double, double>, 5>{
            agg([](const FiveNumberSummary& s) { return s.min; }),
            agg([](const FiveNumberSummary& s) { return s.q25; }),
            agg([](const FiveNumberSummary& s) { return s.median; }),
            agg([](const FiveNumberSummary& s) { return s.q75; }),
            agg([](const FiveNumberSummary& s) { return s.max; })};
    };
    std::ofstream summary_csv(out + "/summary.csv");
    summary_csv << "variant,min,min_std,q25,q25_std,median,median_std,q75,q75_std,max,max_std\n";
    summary_csv.precision(17);
    auto emit = [&](const std::string& variant, const std::array<std::pair<double, double>, 5>& q) {
        summary_csv << variant;
        for (const auto& [m, s] : q) summary_csv << "," << m << "," << s;
        summary_csv << "\n";
    };
    emit(cfg.experiment + "/axis" + std::to_string(axis),
         summarize([](const SeedResult& s) { return s.axis_disp; }));
    emit(cfg.experiment + "/projection",
         summarize([](const SeedResult& s) { return s.proj_disp; }));

    // Feature importance and visitation from the last checkpoint evaluated.
    Vec fi = feature_importance(proj);
    std::ofstream fi_csv(out + "/feature_importance.csv");
    fi_csv << "feature,importance\n";
    fi_csv.precision(17);
    for (int j = 0; j < fi.size(); ++j) fi_csv << j << "," << fi[j] << "\n";
    visitation_export(last_per_skill, proj, out + "/visitation.csv");

    write_sidecar_manifest(out + "/summary.csv", cfg, static_cast<long>(checkpoints.size()));
    std::cout << "evaluation reports written to " << out << std::endl;
    return 0;
}

// Serves the built-in maze over stdin/stdout with the adapter wire protocol.
int cmd_serve_maze(const CommonOpts& common) {
    Config cfg = load_config(common);
    PointMaze env(cfg.max_episode_steps, cfg.shared_reset_epsilon);
    serve_environment(env, cfg.seed, /*read_fd=*/0, /*write_fd=*/1);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised skill discovery with a learned state projection"};
    app.require_subcommand(1);

    CommonOpts common;
    std::optional<long> steps;
    std::optional<int> skills_override, embedding_dim;
    std::string ref_dir, dataset_path, projection_path;
    std::vector<std::string> checkpoints;
    bool baseline = false, resume = false, stochastic = false;
    int n_traj = 0, horizon = 0, axis = 0, workers = 1, rollouts = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "config file (key = value lines)");
        sub->add_option("--seed", common.seed, "root seed override");
        sub->add_option("--out", common.out, "output path (default under $SKILLDISC_OUT or ./runs)");
    };

    auto* train_ref = app.add_subcommand("train-ref", "train the reference policy on extrinsic reward");
    add_common(train_ref);
    train_ref->add_option("--steps", steps, "total environment interactions");

    auto* collect = app.add_subcommand("collect", "roll out expert + random trajectories into a dataset");
    add_common(collect);
    collect->add_option("--ref", ref_dir, "reference-policy checkpoint directory")->required();
    collect->add_option("--n-traj", n_traj, "trajectories per label");
    collect->add_option("--horizon", horizon, "trajectory length");

    auto* fit = app.add_subcommand("fit-encoder", "fit the linear projection from a labeled dataset");
    add_common(fit);
    fit->add_option("--dataset", dataset_path, "labeled state dataset")->required();
    fit->add_option("--embedding-dim", embedding_dim, "projection output dimension");

    auto* train_skills = app.add_subcommand("train-skills", "run projection-guided skill discovery");
    add_common(train_skills);
    train_skills->add_option("--projection", projection_path, "projection file from fit-encoder");
    train_skills->add_flag("--baseline", baseline, "identity projection on raw states");
    train_skills->add_option("--skills", skills_override, "number of skills K");
    train_skills->add_option("--steps", steps, "total environment interactions");
    train_skills->add_flag("--resume", resume, "continue from the checkpoint in --out");

    auto* eval_cmd = app.add_subcommand("eval", "deterministic rollouts and report CSVs");
    add_common(eval_cmd);
    eval_cmd->add_option("--checkpoint", checkpoints, "skill checkpoint directory (repeatable)")
        ->required();
    eval_cmd->add_option("--axis", axis, "state coordinate for displacement");
    eval_cmd->add_option("--skills", skills_override, "number of skills K");
    eval_cmd->add_option("--horizon", horizon, "rollout horizon (default max_episode_steps)");
    eval_cmd->add_option("--rollouts", rollouts, "rollouts per skill");
    eval_cmd->add_option("--workers", workers, "parallel rollout workers");
    eval_cmd->add_flag("--stochastic", stochastic, "stochastic rollouts (default deterministic)");
    eval_cmd->add_flag("--deterministic", "deterministic rollouts (the default)");

    auto* serve = app.add_subcommand("serve-maze", "serve the point maze over stdio (adapter protocol)");
    add_common(serve);

    try {
        app.parse(argc, argv);
        if (train_ref->parsed()) return cmd_train_ref(common, steps);
        if (collect->parsed()) return cmd_collect(common, ref_dir, n_traj, horizon);
        if (fit->parsed()) return cmd_fit_encoder(common, dataset_path, embedding_dim);
        if (train_skills->parsed())
            return cmd_train_skills(common, projection_path, baseline, skills_override, steps, resume);
        if (eval_cmd->parsed())
            return cmd_eval(common, checkpoints, axis, stochastic, workers, skills_override, horizon,
                            rollouts);
        if (serve->parsed()) return cmd_serve_maze(common);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << std::endl;
        return 2;
    } catch (const ArtifactError& e) {
        std::cerr << "artifact error: " << e.what() << std::endl;
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << std::endl;
        return 4;
    }
    return 0;
}
