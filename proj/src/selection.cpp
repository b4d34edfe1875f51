#include "wamlab/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wamlab/errors.hpp"

namespace wamlab {

namespace {

void require_nonempty(const std::vector<Branch>& branches, const char* who) {
  if (branches.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty branch list");
  }
}

// Lowest index among maxima.
int argmax_lowest(const std::vector<double>& xs) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(xs.size()); ++i) {
    if (xs[i] > xs[best]) best = i;
  }
  return best;
}

std::vector<double> consensus_scores(const std::vector<Branch>& branches,
                                     const ConsistencyConfig& cfg) {
  std::vector<LatentVec> futures;
  futures.reserve(branches.size());
  for (const auto& b : branches) futures.push_back(b.predicted_future);
  const LatentVec consensus = mean_latent(futures);
  std::vector<double> scores;
  scores.reserve(branches.size());
  for (const auto& b : branches)
    scores.push_back(consistency_score(b.predicted_future, consensus, cfg));
  return scores;
}

}  // namespace

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kSingle: return "single";
    case Strategy::kValuePrediction: return "value";
    case Strategy::kConsistencyExploring: return "exploring";
    case Strategy::kConsistencyConsensus: return "consensus";
    case Strategy::kWeightedConsensus: return "weighted";
  }
  return "unknown";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "single") return Strategy::kSingle;
  if (name == "value") return Strategy::kValuePrediction;
  if (name == "exploring") return Strategy::kConsistencyExploring;
  if (name == "consensus") return Strategy::kConsistencyConsensus;
  if (name == "weighted") return Strategy::kWeightedConsensus;
  throw ConfigError("unknown selection strategy '" + name + "'");
}

std::vector<double> softmax_weights(const std::vector<double>& scores,
                                    double tau) {
  if (scores.empty()) throw std::invalid_argument("softmax_weights: empty scores");
  if (!(tau > 0.0)) throw std::invalid_argument("softmax_weights: tau must be > 0");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp((scores[i] - top) / tau);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

SelectionOutcome select_single(const std::vector<Branch>& branches) {
  require_nonempty(branches, "select_single");
  SelectionOutcome out;
  out.chosen_index = 0;
  out.scores.assign(branches.size(), 0.0);  // unscored baseline
  out.executed_action = branches[0].actions;
  out.exploration_cost = 0;
  return out;
}

SelectionOutcome select_by_value(const std::vector<Branch>& branches) {
  require_nonempty(branches, "select_by_value");
  SelectionOutcome out;
  out.scores.reserve(branches.size());
  for (const auto& b : branches) {
    if (!b.predicted_value.has_value()) {
      throw std::invalid_argument(
          "select_by_value: branch lacks a predicted value; this strategy "
          "requires a WAM with a value head");
    }
    out.scores.push_back(*b.predicted_value);
  }
  out.chosen_index = argmax_lowest(out.scores);
  out.executed_action = branches[out.chosen_index].actions;
  out.exploration_cost = 0;
  return out;
}

SelectionOutcome select_by_exploring(const std::vector<Branch>& branches,
                                     const EnvState& snapshot_state,
                                     const TaskSpec& spec,
                                     const ConsistencyConfig& cfg) {
  require_nonempty(branches, "select_by_exploring");
  SelectionOutcome out;
  out.scores.reserve(branches.size());
  for (const auto& b : branches) {
    EnvState trial = restore(snapshot(snapshot_state));
    execute_actions(trial, b.actions, spec);
    const LatentVec realized = encode_latent(trial.physical, spec);
    out.scores.push_back(consistency_score(b.predicted_future, realized, cfg));
  }
  out.chosen_index = argmax_lowest(out.scores);
  out.executed_action = branches[out.chosen_index].actions;
  out.exploration_cost = static_cast<int>(branches.size());
  return out;
}

SelectionOutcome select_by_consensus(const std::vector<Branch>& branches,
                                     const ConsistencyConfig& cfg,
                                     const SelectionConfig& sel) {
  require_nonempty(branches, "select_by_consensus");
  SelectionOutcome out;
  out.scores = consensus_scores(branches, cfg);
  out.weights = softmax_weights(out.scores, sel.tau);
  out.chosen_index = argmax_lowest(out.scores);
  out.executed_action = branches[out.chosen_index].actions;
  out.exploration_cost = 0;
  return out;
}

SelectionOutcome select_weighted_consensus(const std::vector<Branch>& branches,
                                           const ConsistencyConfig& cfg,
                                           const SelectionConfig& sel) {
  require_nonempty(branches, "select_weighted_consensus");
  const std::size_t horizon = branches.front().actions.size();
  const std::size_t n_lin = branches.front().actions.front().linear.size();
  const std::size_t n_ang = branches.front().actions.front().angular.size();
  for (const auto& b : branches) {
    if (b.actions.size() != horizon ||
        b.actions.front().linear.size() != n_lin ||
        b.actions.front().angular.size() != n_ang) {
      throw std::invalid_argument(
          "select_weighted_consensus: branches disagree on action dimensions");
    }
  }

  SelectionOutcome out;
  out.scores = consensus_scores(branches, cfg);
  out.weights = softmax_weights(out.scores, sel.tau);
  out.chosen_index = argmax_lowest(out.scores);
  out.exploration_cost = 0;

  out.executed_action.resize(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    ActionVec blend;
    blend.linear.assign(n_lin, 0.0);
    blend.angular.assign(n_ang, 0.0);
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const ActionVec& a = branches[i].actions[k];
      for (std::size_t j = 0; j < n_lin; ++j)
        blend.linear[j] += out.weights[i] * a.linear[j];
      // Naive Euclidean average of raw radians; near the +-pi seam the
      // blend can point away from every hypothesis.
      for (std::size_t j = 0; j < n_ang; ++j)
        blend.angular[j] += out.weights[i] * a.angular[j];
    }
    for (double& ang : blend.angular) ang = wrap_angle(ang);
    out.executed_action[k] = std::move(blend);
  }
  return out;
}

}  // namespace wamlab
