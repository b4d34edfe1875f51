#pragma once

#include <string>
#include <vector>

#include "wamlab/consistency.hpp"
#include "wamlab/envs.hpp"
#include "wamlab/wam.hpp"

namespace wamlab {

enum class Strategy {
  kSingle,
  kValuePrediction,
  kConsistencyExploring,
  kConsistencyConsensus,
  kWeightedConsensus,
};

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct SelectionConfig {
  Strategy strategy = Strategy::kSingle;
  int n_candidates = 8;
  double tau = 1.0;  // softmax temperature; ties always break to lowest index
};

struct SelectionOutcome {
  int chosen_index = 0;
  std::vector<double> scores;          // length N
  std::vector<double> weights;         // softmax weights; empty unless consensus-based
  std::vector<ActionVec> executed_action;
  int exploration_cost = 0;            // env branch executions consumed
};

// Numerically stable softmax of scores / tau; nonnegative, sums to 1.
std::vector<double> softmax_weights(const std::vector<double>& scores,
                                    double tau);

// Baseline: always take the first branch.
SelectionOutcome select_single(const std::vector<Branch>& branches);

// Argmax of the model's predicted values. Throws if any branch lacks a
// value (the strategy requires a value head).
SelectionOutcome select_by_value(const std::vector<Branch>& branches);

// Executes every branch from the snapshot (noise replayed from the
// snapshot's stream, so branches are noise-controlled), scores realized
// consistency, and returns the winner. Costs N branch executions.
SelectionOutcome select_by_exploring(const std::vector<Branch>& branches,
                                     const EnvState& snapshot_state,
                                     const TaskSpec& spec,
                                     const ConsistencyConfig& cfg);

// Scores each branch against the mean of all predicted futures and takes
// the winner (winner-takes-all); softmax weights are logged.
SelectionOutcome select_by_consensus(const std::vector<Branch>& branches,
                                     const ConsistencyConfig& cfg,
                                     const SelectionConfig& sel);

// Consensus weights, but the executed action is the weight-blended mean of
// the branch actions. Angular components are averaged linearly on purpose:
// this reproduces the failure mode the blend is known for.
SelectionOutcome select_weighted_consensus(const std::vector<Branch>& branches,
                                           const ConsistencyConfig& cfg,
                                           const SelectionConfig& sel);

}  // namespace wamlab
