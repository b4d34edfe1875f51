#include "wamlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "wamlab/errors.hpp"
#include "wamlab/stats.hpp"

namespace wamlab {

namespace {

// Sentinel labels that never collide with decision-step or branch indices.
constexpr uint64_t kResetStep = ~0ULL;
constexpr uint64_t kValueBranch = ~0ULL;

SelectionOutcome dispatch_select(const SelectionConfig& sel,
                                 const std::vector<Branch>& branches,
                                 const EnvState& state, const TaskSpec& spec,
                                 const ConsistencyConfig& ccfg) {
  switch (sel.strategy) {
    case Strategy::kSingle: return select_single(branches);
    case Strategy::kValuePrediction: return select_by_value(branches);
    case Strategy::kConsistencyExploring:
      return select_by_exploring(branches, state, spec, ccfg);
    case Strategy::kConsistencyConsensus:
      return select_by_consensus(branches, ccfg, sel);
    case Strategy::kWeightedConsensus:
      return select_weighted_consensus(branches, ccfg, sel);
  }
  throw ConfigError("unknown selection strategy");
}

std::tuple<std::string, std::string, std::string, int, uint64_t> sort_key(
    const EpisodeLog& e) {
  return {e.task_id, e.wam_preset, e.strategy, e.n_candidates, e.episode_seed};
}

}  // namespace

std::string alignment_name(Alignment a) {
  switch (a) {
    case Alignment::kAligned: return "aligned";
    case Alignment::kMisaligned: return "misaligned";
    case Alignment::kUndetermined: return "undetermined";
  }
  return "unknown";
}

EpisodeLog run_episode(const TaskSpec& spec, const WamSpec& wam,
                       const SelectionConfig& sel,
                       const ConsistencyConfig& ccfg, uint64_t master_seed,
                       uint64_t episode_index, bool run_to_horizon) {
  validate_task(spec);
  if (sel.n_candidates < 1) throw ConfigError("n_candidates must be >= 1");

  EpisodeLog log;
  log.task_id = spec.task_id;
  log.episode_seed = episode_index;
  log.strategy = strategy_name(sel.strategy);
  log.n_candidates = sel.n_candidates;

  RngStream reset_rs = derive_stream(master_seed, episode_index, kResetStep, 0);
  EnvState state = reset(spec, reset_rs);
  int stall_run = 0;

  for (int t = 0; t < spec.episode_horizon; ++t) {
    const Observation obs = observe(state, spec);
    StepDiagnostics diag;
    diag.t = t;
    if (wam.value_head) {
      RngStream value_rs = derive_stream(master_seed, episode_index,
                                         static_cast<uint64_t>(t), kValueBranch);
      diag.value_pred = predict_value(obs, spec, wam, value_rs);
    }

    const StreamLabel label{master_seed, episode_index, static_cast<uint64_t>(t)};
    const std::vector<Branch> branches =
        sample_branches(state, obs, spec, wam, sel.n_candidates, stall_run, label);
    const SelectionOutcome outcome =
        dispatch_select(sel, branches, state, spec, ccfg);

    execute_actions(state, outcome.executed_action, spec);
    const LatentVec realized = encode_latent(state.physical, spec);

    diag.chosen_branch = outcome.chosen_index;
    diag.branch_scores = outcome.scores;
    diag.c_t = consistency_score(branches[outcome.chosen_index].predicted_future,
                                 realized, ccfg);
    diag.delta_z = latent_change(obs.latent, realized);
    log.total_exploration_cost += outcome.exploration_cost;
    log.steps.push_back(std::move(diag));

    stall_run = log.steps.back().delta_z < wam.stall_threshold ? stall_run + 1 : 0;
    if (!log.stall_onset.has_value() && state.stalled) log.stall_onset = t;

    if (is_success(state, spec)) {
      log.success = true;
      if (!run_to_horizon) break;
    }
  }
  log.episode_consistency = episode_consistency(log.steps);
  return log;
}

std::map<std::string, Alignment> compute_alignment(
    const std::vector<EpisodeLog>& episodes) {
  struct Acc {
    double s_sum = 0.0, f_sum = 0.0;
    int s_n = 0, f_n = 0;
  };
  std::map<std::string, Acc> by_task;
  for (const auto& e : episodes) {
    if (e.strategy != strategy_name(Strategy::kSingle)) continue;
    auto& acc = by_task[e.task_id];
    if (e.success) {
      acc.s_sum += e.episode_consistency;
      acc.s_n += 1;
    } else {
      acc.f_sum += e.episode_consistency;
      acc.f_n += 1;
    }
  }
  std::map<std::string, Alignment> out;
  for (const auto& e : episodes) {
    if (out.count(e.task_id)) continue;
    auto it = by_task.find(e.task_id);
    if (it == by_task.end() || it->second.s_n == 0 || it->second.f_n == 0) {
      out[e.task_id] = Alignment::kUndetermined;
      continue;
    }
    const Acc& a = it->second;
    out[e.task_id] = a.s_sum / a.s_n > a.f_sum / a.f_n ? Alignment::kAligned
                                                       : Alignment::kMisaligned;
  }
  return out;
}

RunDataset run_suite(const SuitePlan& plan, uint64_t master_seed) {
  if (plan.tasks.empty() || plan.presets.empty() || plan.selections.empty() ||
      plan.seeds < 1) {
    throw ConfigError("run_suite: empty grid");
  }
  struct Cell {
    const TaskSpec* task;
    const std::string* preset_name;
    const WamSpec* wam;
    const SelectionConfig* sel;
    int seed;
  };
  std::vector<Cell> cells;
  for (const auto& task : plan.tasks) {
    for (const auto& [name, wam] : plan.presets) {
      validate_wam(wam, name);
      for (const auto& sel : plan.selections) {
        for (int seed = 0; seed < plan.seeds; ++seed) {
          cells.push_back(Cell{&task, &name, &wam, &sel, seed});
        }
      }
    }
  }

  std::vector<EpisodeLog> episodes(cells.size());
  auto work = [&](const Cell& cell, EpisodeLog& slot) {
    // Content-derived cell key: independent of grid order, strategy and N,
    // so matched (task, preset, seed) cells share their branch streams.
    const uint64_t cell_master = hash_label(master_seed, fnv1a(cell.task->task_id),
                                            fnv1a(*cell.preset_name), 0);
    slot = run_episode(*cell.task, *cell.wam, *cell.sel, plan.consistency,
                       cell_master, static_cast<uint64_t>(cell.seed),
                       plan.run_to_horizon);
    slot.wam_preset = *cell.preset_name;
  };

  const int jobs = std::max(1, plan.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) work(cells[i], episodes[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        try {
          for (std::size_t i = next.fetch_add(1); i < cells.size();
               i = next.fetch_add(1)) {
            work(cells[i], episodes[i]);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(cells.size());  // stop the other workers
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::sort(episodes.begin(), episodes.end(),
            [](const EpisodeLog& a, const EpisodeLog& b) {
              return sort_key(a) < sort_key(b);
            });

  RunDataset ds;
  ds.episodes = std::move(episodes);
  ds.alignment = compute_alignment(ds.episodes);
  return ds;
}

std::vector<ScalingRow> scaling_table(const RunDataset& ds) {
  std::map<std::pair<std::string, int>, std::pair<int, int>> acc;  // (succ, total)
  for (const auto& e : ds.episodes) {
    auto& [succ, total] = acc[{e.strategy, e.n_candidates}];
    succ += e.success ? 1 : 0;
    total += 1;
  }
  std::vector<ScalingRow> rows;
  for (const auto& [key, counts] : acc) {
    rows.push_back(ScalingRow{key.first, key.second,
                              static_cast<double>(counts.first) / counts.second,
                              counts.second});
  }
  return rows;
}

CollapseReport collapse_report(const RunDataset& ds) {
  CollapseReport rep;
  rep.alignment = ds.alignment;
  for (const auto& [task, a] : ds.alignment) {
    if (a == Alignment::kMisaligned) rep.misaligned_tasks += 1;
  }

  struct Series {
    std::vector<double> sum;
    std::vector<int> n;
  };
  std::array<std::array<Series, 2>, 2> cells;
  std::vector<double> all_dz, all_c;
  for (const auto& e : ds.episodes) {
    for (const auto& s : e.steps) {
      all_dz.push_back(s.delta_z);
      all_c.push_back(s.c_t);
    }
    const auto it = ds.alignment.find(e.task_id);
    if (it == ds.alignment.end() || it->second == Alignment::kUndetermined)
      continue;
    Series& series =
        cells[it->second == Alignment::kMisaligned ? 1 : 0][e.success ? 0 : 1];
    if (series.sum.size() < e.steps.size()) {
      series.sum.resize(e.steps.size(), 0.0);
      series.n.resize(e.steps.size(), 0);
    }
    for (std::size_t t = 0; t < e.steps.size(); ++t) {
      series.sum[t] += e.steps[t].delta_z;
      series.n[t] += 1;
    }
  }
  for (int a = 0; a < 2; ++a) {
    for (int o = 0; o < 2; ++o) {
      const Series& s = cells[a][o];
      CellCurve& c = rep.delta_z_cells[a][o];
      c.present = !s.sum.empty();
      for (std::size_t t = 0; t < s.sum.size(); ++t) {
        c.mean.push_back(s.sum[t] / s.n[t]);
        c.alive.push_back(s.n[t]);
      }
    }
  }
  if (all_dz.size() >= 3) rep.dz_vs_c = correlations(all_dz, all_c);
  return rep;
}

UtilityGapReport utility_gap_report(const RunDataset& ds) {
  std::vector<std::vector<double>> v_succ, v_fail, c_succ, c_fail;
  for (const auto& e : ds.episodes) {
    std::vector<double> values, cs;
    values.reserve(e.steps.size());
    cs.reserve(e.steps.size());
    for (const auto& s : e.steps) {
      if (!s.value_pred.has_value()) {
        throw std::runtime_error(
            "utility_gap_report: episodes lack value predictions (WAM preset "
            "has no value head)");
      }
      values.push_back(*s.value_pred);
      cs.push_back(s.c_t);
    }
    (e.success ? v_succ : v_fail).push_back(std::move(values));
    (e.success ? c_succ : c_fail).push_back(std::move(cs));
  }
  UtilityGapReport rep;
  rep.value_gap = gap_curve(v_succ, v_fail);
  rep.consistency_gap = gap_curve(c_succ, c_fail);
  return rep;
}

MitigationReport mitigation_report(const RunDataset& ds,
                                   const std::string& strategy,
                                   const std::string& baseline) {
  using Key = std::tuple<std::string, std::string, uint64_t>;
  std::map<Key, const EpisodeLog*> h_arm, l_arm;
  for (const auto& e : ds.episodes) {
    const Key key{e.task_id, e.wam_preset, e.episode_seed};
    if (e.strategy == strategy) h_arm[key] = &e;
    if (e.strategy == baseline) l_arm[key] = &e;
  }
  if (h_arm.empty() || l_arm.empty()) {
    throw std::runtime_error("mitigation_report: missing strategy arm '" +
                             (h_arm.empty() ? strategy : baseline) + "'");
  }
  for (const auto& [key, e] : h_arm) {
    if (!l_arm.count(key)) {
      throw std::runtime_error("mitigation_report: unmatched pair for task '" +
                               std::get<0>(key) + "'");
    }
  }
  for (const auto& [key, e] : l_arm) {
    if (!h_arm.count(key)) {
      throw std::runtime_error("mitigation_report: unmatched pair for task '" +
                               std::get<0>(key) + "'");
    }
  }

  MitigationReport rep;
  rep.strategy = strategy;
  rep.baseline = baseline;
  std::size_t max_len = 0;
  for (const auto& [key, e] : h_arm) {
    max_len = std::max(max_len,
                       std::min(e->steps.size(), l_arm.at(key)->steps.size()));
  }
  for (std::size_t t = 0; t < max_len; ++t) {
    double dz = 0.0, dc = 0.0;
    int n = 0;
    for (const auto& [key, h] : h_arm) {
      const EpisodeLog* l = l_arm.at(key);
      if (t < h->steps.size() && t < l->steps.size()) {
        dz += h->steps[t].delta_z - l->steps[t].delta_z;
        dc += h->steps[t].c_t - l->steps[t].c_t;
        n += 1;
      }
    }
    if (n == 0) break;
    rep.delta_z_diff.push_back(dz / n);
    rep.c_diff.push_back(dc / n);
    rep.pairs.push_back(n);
  }
  return rep;
}

std::vector<ScalingRow> experiment_scaling(const SuitePlan& base,
                                           uint64_t master_seed,
                                           const std::vector<int>& n_values) {
  SuitePlan plan = base;
  plan.selections.clear();
  for (const auto& sel : base.selections) {
    for (int n : n_values) {
      SelectionConfig s = sel;
      s.n_candidates = n;
      plan.selections.push_back(s);
    }
  }
  return scaling_table(run_suite(plan, master_seed));
}

CollapseReport experiment_collapse(const SuitePlan& plan, uint64_t master_seed) {
  return collapse_report(run_suite(plan, master_seed));
}

UtilityGapReport experiment_utility_gap(const SuitePlan& plan,
                                        uint64_t master_seed) {
  return utility_gap_report(run_suite(plan, master_seed));
}

MitigationReport experiment_mitigation(SuitePlan plan, uint64_t master_seed) {
  const int n = plan.selections.empty() ? 8 : plan.selections.front().n_candidates;
  const double tau = plan.selections.empty() ? 1.0 : plan.selections.front().tau;
  plan.selections = {
      SelectionConfig{Strategy::kSingle, n, tau},
      SelectionConfig{Strategy::kConsistencyConsensus, n, tau},
  };
  // Trace comparison needs fixed-length arms; collapse lives on the
  // stall-prone tasks, so the free-space tasks are left out.
  plan.run_to_horizon = true;
  std::vector<TaskSpec> stall_tasks;
  for (const auto& t : plan.tasks) {
    if (t.family == Family::kStallTrap) stall_tasks.push_back(t);
  }
  if (!stall_tasks.empty()) plan.tasks = std::move(stall_tasks);
  RunDataset ds = run_suite(plan, master_seed);
  return mitigation_report(ds, strategy_name(Strategy::kConsistencyConsensus),
                           strategy_name(Strategy::kSingle));
}

}  // namespace wamlab
