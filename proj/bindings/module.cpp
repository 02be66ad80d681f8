// Python bindings for the main pipeline operations: environment access,
// reference training, dataset collection, encoder pretraining, skill
// discovery, and the reporting statistics.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "skilldisc/errors.hpp"
#include "skilldisc/eval.hpp"
#include "skilldisc/point_maze.hpp"
#include "skilldisc/pretrain.hpp"
#include "skilldisc/skill.hpp"

namespace py = pybind11;
using namespace sd;

namespace {

// Owns the environment together with its generator so Python callers only
// deal with arrays.
class MazeSession {
public:
    MazeSession(std::uint64_t seed, int max_episode_steps, bool shared_reset_epsilon)
        : env_(max_episode_steps, shared_reset_epsilon), rng_(make_rng(seed, "py/maze")) {}

    Vec reset() { return env_.reset(rng_); }

    py::tuple step(const Vec& action) {
        StepResult r = env_.step(action);
        return py::make_tuple(r.next_state, r.extrinsic_reward, r.done);
    }

private:
    PointMaze env_;
    Rng rng_;
};

Config config_from_text(const std::string& text) { return Config::from_string(text); }

py::dict ref_metrics_dict(const RefEpochMetrics& m) {
    py::dict d;
    d["epoch"] = m.epoch;
    d["env_steps"] = m.env_steps;
    d["q1_loss"] = m.q1_loss;
    d["q2_loss"] = m.q2_loss;
    d["policy_loss"] = m.policy_loss;
    d["mean_episode_return"] = m.mean_episode_return;
    d["eval_return"] = m.eval_return;
    return d;
}

py::dict skill_metrics_dict(const SkillEpochMetrics& m) {
    py::dict d;
    d["epoch"] = m.epoch;
    d["env_steps"] = m.env_steps;
    d["q1_loss"] = m.q1_loss;
    d["q2_loss"] = m.q2_loss;
    d["policy_loss"] = m.policy_loss;
    d["disc_loss"] = m.disc_loss;
    d["disc_acc"] = m.disc_acc;
    d["mean_intrinsic_reward"] = m.mean_intrinsic_reward;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Skill discovery guided by a learned linear state projection";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<ArtifactError>(m, "ArtifactError");
    py::register_exception<NumericalError>(m, "NumericalError");

    py::class_<Config>(m, "Config")
        .def(py::init<>())
        .def_static("from_string", &config_from_text)
        .def_static("from_file", &Config::from_file)
        .def("set", &Config::set)
        .def("validate", &Config::validate)
        .def("to_string", &Config::to_string)
        .def("hash", &Config::hash)
        .def_readwrite("seed", &Config::seed)
        .def_readwrite("num_skills", &Config::num_skills)
        .def_readwrite("embedding_dim", &Config::embedding_dim)
        .def_readwrite("epochs", &Config::epochs);

    py::class_<MazeSession>(m, "MazeSession")
        .def(py::init<std::uint64_t, int, bool>(), py::arg("seed"),
             py::arg("max_episode_steps") = 100, py::arg("shared_reset_epsilon") = false)
        .def("reset", &MazeSession::reset)
        .def("step", &MazeSession::step, py::arg("action"));

    py::class_<Standardizer>(m, "Standardizer")
        .def_readonly("mean", &Standardizer::mean)
        .def_readonly("std", &Standardizer::std);

    py::class_<LinearProjection>(m, "LinearProjection")
        .def_readonly("chi", &LinearProjection::chi)
        .def_readonly("standardizer", &LinearProjection::standardizer)
        .def_readonly("standardize_enabled", &LinearProjection::standardize_enabled)
        .def("encode_raw",
             [](const LinearProjection& p, const Vec& state) { return p.encode_raw(state); })
        .def("save", &LinearProjection::save)
        .def_static("load", &LinearProjection::load)
        .def_static("identity", &LinearProjection::identity);

    py::class_<FiveNumberSummary>(m, "FiveNumberSummary")
        .def_readonly("min", &FiveNumberSummary::min)
        .def_readonly("q25", &FiveNumberSummary::q25)
        .def_readonly("median", &FiveNumberSummary::median)
        .def_readonly("q75", &FiveNumberSummary::q75)
        .def_readonly("max", &FiveNumberSummary::max);

    m.def("displacement_stats", &displacement_stats, py::arg("values"));

    m.def("mi_lower_bound_check", &mi_lower_bound_check, py::arg("joint"), py::arg("q"),
          "Exact (E_p[log p(z|s)], E_p[log q(z|s)]) for discrete tables");

    m.def(
        "train_reference",
        [](const Config& cfg, const std::string& out_dir) {
            Config c = cfg;
            c.validate();
            PointMaze env(c.max_episode_steps, c.shared_reset_epsilon);
            std::vector<py::dict> history;
            SacTrainer trainer = train_reference_policy(
                env, c, [&](const RefEpochMetrics& em) { history.push_back(ref_metrics_dict(em)); });
            long steps = history.empty() ? 0 : history.back()["env_steps"].cast<long>();
            trainer.save(out_dir, steps);
            return history;
        },
        py::arg("config"), py::arg("out_dir"),
        "Train the extrinsic-reward reference policy on the maze and checkpoint it");

    m.def(
        "collect_dataset",
        [](const Config& cfg, const std::string& ref_dir, const std::string& out_path) {
            Config c = cfg;
            c.validate();
            PointMaze env(c.max_episode_steps, c.shared_reset_epsilon);
            SacTrainer ref = SacTrainer::load(ref_dir, c, 1);
            Rng rng = make_rng(c.seed, "collect");
            LabeledStateDataset ds =
                collect_labeled_states(env, ref.policy(), c.n_traj, c.max_episode_steps, rng);
            ds.save_binary(out_path);
            return static_cast<long>(ds.samples.size());
        },
        py::arg("config"), py::arg("ref_dir"), py::arg("out_path"),
        "Roll out expert and random trajectories into a labeled dataset file");

    m.def(
        "fit_encoder",
        [](const Config& cfg, const std::string& dataset_path) {
            Config c = cfg;
            c.validate();
            LabeledStateDataset ds = LabeledStateDataset::load_binary(dataset_path);
            PretrainOptions opts;
            opts.lr = c.lr_encoder;
            opts.classifier_hidden = c.hidden_sizes;
            opts.seed = c.seed;
            opts.standardize = c.standardize;
            PretrainResult res = pretrain_encoder(ds, c.embedding_dim, opts);
            return py::make_tuple(res.projection, res.held_out_accuracy, res.steps);
        },
        py::arg("config"), py::arg("dataset_path"),
        "Fit the linear projection; returns (projection, held_out_accuracy, steps)");

    m.def(
        "train_skills",
        [](const Config& cfg, const LinearProjection& proj, const std::string& out_dir) {
            Config c = cfg;
            c.validate();
            PointMaze env(c.max_episode_steps, c.shared_reset_epsilon);
            Rng net_rng = make_rng(c.seed, "skill/init");
            SkillTrainer trainer(c, proj, net_rng);
            std::vector<py::dict> history;
            long env_steps = 0;
            for (int epoch = 0; epoch < c.epochs; ++epoch) {
                SkillEpochMetrics em = trainer.run_epoch(env, epoch);
                env_steps = em.env_steps;
                history.push_back(skill_metrics_dict(em));
            }
            trainer.save(out_dir, env_steps);
            return history;
        },
        py::arg("config"), py::arg("projection"), py::arg("out_dir"),
        "Run projection-guided skill discovery and checkpoint the result");
}
