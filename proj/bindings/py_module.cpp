#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wamlab/commands.hpp"
#include "wamlab/consistency.hpp"
#include "wamlab/core.hpp"
#include "wamlab/harness.hpp"
#include "wamlab/log_io.hpp"
#include "wamlab/selection.hpp"
#include "wamlab/stats.hpp"

namespace py = pybind11;
using namespace wamlab;

namespace {

std::vector<LabeledScore> make_labeled(const std::vector<std::string>& task_ids,
                                       const std::vector<double>& scores,
                                       const std::vector<bool>& labels) {
  if (task_ids.size() != scores.size() || scores.size() != labels.size()) {
    throw std::invalid_argument("task_ids, scores and labels must align");
  }
  std::vector<LabeledScore> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back(LabeledScore{task_ids[i], static_cast<int>(i), scores[i],
                               labels[i]});
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "wamlab core: consistency scoring, candidate selection and the "
            "statistics battery";

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<uint64_t>(), py::arg("key"))
      .def("next_u64", &RngStream::next_u64)
      .def("uniform", &RngStream::uniform)
      .def("gaussian", py::overload_cast<>(&RngStream::gaussian))
      .def_property_readonly("key", &RngStream::key)
      .def_property_readonly("cursor", &RngStream::cursor);

  m.def("derive_stream", &derive_stream, py::arg("master_seed"),
        py::arg("episode"), py::arg("step"), py::arg("branch"));
  m.def("mse_distance", &mse_distance, py::arg("a"), py::arg("b"));
  m.def("mean_latent", &mean_latent, py::arg("vectors"));
  m.def("wrap_angle", &wrap_angle, py::arg("radians"));

  m.def(
      "consistency_score",
      [](const LatentVec& predicted, const LatentVec& realized, double alpha) {
        return consistency_score(predicted, realized,
                                 ConsistencyConfig{alpha, DistanceKind::kMse});
      },
      py::arg("predicted"), py::arg("realized"), py::arg("alpha") = 0.1);
  m.def("latent_change", &latent_change, py::arg("z_now"), py::arg("z_future"));

  m.def("softmax_weights", &softmax_weights, py::arg("scores"),
        py::arg("tau") = 1.0);
  m.def(
      "consensus_select",
      [](const std::vector<LatentVec>& futures, double alpha, double tau) {
        std::vector<Branch> branches;
        branches.reserve(futures.size());
        for (const auto& f : futures) {
          Branch b;
          b.predicted_future = f;
          b.actions = {ActionVec{{0.0}, {0.0}}};
          branches.push_back(std::move(b));
        }
        const SelectionOutcome out = select_by_consensus(
            branches, ConsistencyConfig{alpha, DistanceKind::kMse},
            SelectionConfig{Strategy::kConsistencyConsensus,
                            static_cast<int>(futures.size()), tau});
        return py::make_tuple(out.chosen_index, out.scores, out.weights);
      },
      py::arg("futures"), py::arg("alpha") = 0.1, py::arg("tau") = 1.0,
      "Winner-takes-all consensus over predicted futures; returns "
      "(index, scores, weights)");

  m.def("cohens_d", &cohens_d, py::arg("group_a"), py::arg("group_b"));
  m.def("auc_raw", &auc_raw, py::arg("scores"), py::arg("labels"));
  m.def(
      "correlations",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const Correlation c = correlations(x, y);
        return py::make_tuple(c.pearson, c.spearman);
      },
      py::arg("x"), py::arg("y"), "Returns (pearson, spearman)");
  m.def(
      "fit_logistic_1d",
      [](const std::vector<double>& x, const std::vector<bool>& y) {
        const LogisticFit f = fit_logistic_1d(x, y);
        py::dict d;
        d["intercept"] = f.intercept;
        d["slope"] = f.slope;
        d["converged"] = f.converged;
        d["separation"] = f.separation;
        d["iterations"] = f.iterations;
        return d;
      },
      py::arg("features"), py::arg("labels"));
  m.def(
      "zscore_per_task",
      [](const std::vector<std::string>& task_ids,
         const std::vector<double>& scores, const std::vector<bool>& labels) {
        const ZscoreResult r =
            zscore_per_task(make_labeled(task_ids, scores, labels));
        std::vector<double> z;
        z.reserve(r.scores.size());
        for (const auto& s : r.scores) z.push_back(s.score);
        return py::make_tuple(z, r.degenerate_tasks);
      },
      py::arg("task_ids"), py::arg("scores"), py::arg("labels"),
      "Returns (z_scores, degenerate_task_ids)");
  m.def(
      "roc_auc_cv",
      [](const std::vector<std::string>& task_ids,
         const std::vector<double>& scores, const std::vector<bool>& labels,
         int k, uint64_t seed) {
        const CvResult cv = roc_auc_cv(make_labeled(task_ids, scores, labels),
                                       k, RngStream(seed));
        return py::make_tuple(cv.curve.auc, cv.curve.points, cv.k_used);
      },
      py::arg("task_ids"), py::arg("scores"), py::arg("labels"),
      py::arg("k") = 5, py::arg("seed") = 0,
      "Returns (auc, roc_points, k_used)");
  m.def("gap_curve",
        [](const std::vector<std::vector<double>>& succ,
           const std::vector<std::vector<double>>& fail) {
          return gap_curve(succ, fail).gap;
        },
        py::arg("success_series"), py::arg("failure_series"));

  py::enum_<Family>(m, "Family")
      .value("POINT_REACH", Family::kPointReach)
      .value("PUSH_BLOCK", Family::kPushBlock)
      .value("STALL_TRAP", Family::kStallTrap);

  py::class_<TaskSpec>(m, "TaskSpec")
      .def(py::init<>())
      .def_readwrite("task_id", &TaskSpec::task_id)
      .def_readwrite("family", &TaskSpec::family)
      .def_readwrite("goal", &TaskSpec::goal)
      .def_readwrite("success_radius", &TaskSpec::success_radius)
      .def_readwrite("dt", &TaskSpec::dt)
      .def_readwrite("max_speed", &TaskSpec::max_speed)
      .def_readwrite("init_noise", &TaskSpec::init_noise)
      .def_readwrite("noise_std", &TaskSpec::noise_std)
      .def_readwrite("episode_horizon", &TaskSpec::episode_horizon)
      .def_readwrite("control_horizon", &TaskSpec::control_horizon)
      .def_readwrite("latent_dim", &TaskSpec::latent_dim)
      .def_readwrite("block_start", &TaskSpec::block_start)
      .def_readwrite("contact_radius", &TaskSpec::contact_radius)
      .def_readwrite("stall_band_y", &TaskSpec::stall_band_y)
      .def_readwrite("stall_factor", &TaskSpec::stall_factor);

  py::enum_<Formulation>(m, "Formulation")
      .value("JOINT_PREDICTION", Formulation::kJointPrediction)
      .value("INVERSE_DYNAMICS", Formulation::kInverseDynamics);

  py::enum_<CollapseMode>(m, "CollapseMode")
      .value("OFF", CollapseMode::kOff)
      .value("ON_STALL", CollapseMode::kOnStall);

  py::class_<WamSpec>(m, "WamSpec")
      .def(py::init<>())
      .def_readwrite("formulation", &WamSpec::formulation)
      .def_readwrite("pred_noise_std", &WamSpec::pred_noise_std)
      .def_readwrite("bias", &WamSpec::bias)
      .def_readwrite("collapse_mode", &WamSpec::collapse_mode)
      .def_readwrite("stall_threshold", &WamSpec::stall_threshold)
      .def_readwrite("stall_persistence", &WamSpec::stall_persistence)
      .def_readwrite("policy_noise_std", &WamSpec::policy_noise_std)
      .def_readwrite("value_noise_std", &WamSpec::value_noise_std)
      .def_readwrite("value_miscalibration", &WamSpec::value_miscalibration)
      .def_readwrite("competence", &WamSpec::competence)
      .def_readwrite("perturbed_noise_scale", &WamSpec::perturbed_noise_scale)
      .def_readwrite("value_head", &WamSpec::value_head);

  py::enum_<Strategy>(m, "Strategy")
      .value("SINGLE", Strategy::kSingle)
      .value("VALUE_PREDICTION", Strategy::kValuePrediction)
      .value("CONSISTENCY_EXPLORING", Strategy::kConsistencyExploring)
      .value("CONSISTENCY_CONSENSUS", Strategy::kConsistencyConsensus)
      .value("WEIGHTED_CONSENSUS", Strategy::kWeightedConsensus);

  py::class_<SelectionConfig>(m, "SelectionConfig")
      .def(py::init<>())
      .def_readwrite("strategy", &SelectionConfig::strategy)
      .def_readwrite("n_candidates", &SelectionConfig::n_candidates)
      .def_readwrite("tau", &SelectionConfig::tau);

  m.def(
      "run_episode_json",
      [](const TaskSpec& task, const WamSpec& wam, const SelectionConfig& sel,
         double alpha, uint64_t master_seed, uint64_t episode_index) {
        const EpisodeLog log =
            run_episode(task, wam, sel, ConsistencyConfig{alpha, DistanceKind::kMse},
                        master_seed, episode_index);
        return episode_to_jsonl(log);
      },
      py::arg("task"), py::arg("wam"), py::arg("selection"),
      py::arg("alpha") = 0.1, py::arg("master_seed") = 42,
      py::arg("episode_index") = 0,
      "Rolls one episode and returns its JSONL record");
}
