import json
import math

import pytest

import wamlab


def test_consistency_score_matches_closed_form():
    # mse((0,0),(1,3)) = 5 exactly; alpha defaults to 0.1
    assert wamlab.consistency_score([0.0, 0.0], [1.0, 3.0]) == pytest.approx(
        math.exp(-0.5), abs=1e-12
    )
    assert wamlab.consistency_score([0.2, -0.4], [0.2, -0.4]) == 1.0
    assert wamlab.latent_change([0.0, 0.0], [3.0, 4.0]) == pytest.approx(12.5)


def test_core_helpers():
    assert wamlab.mse_distance([1.0], [-1.0]) == pytest.approx(4.0)
    assert wamlab.mean_latent([[1.0], [2.0], [6.0]]) == [3.0]
    rs1 = wamlab.derive_stream(1, 2, 3, 4)
    rs2 = wamlab.derive_stream(1, 2, 3, 4)
    assert [rs1.next_u64() for _ in range(5)] == [rs2.next_u64() for _ in range(5)]
    assert -math.pi <= wamlab.wrap_angle(10.0) < math.pi


def test_stats_battery():
    assert wamlab.cohens_d([1.0, 2.0, 3.0], [3.0, 4.0, 5.0]) == -2.0
    assert wamlab.auc_raw([0.1, 0.4, 0.35, 0.8], [False, False, True, True]) == 0.75
    pearson, spearman = wamlab.correlations([1.0, 2.0, 3.0], [3.0, 1.0, 2.0])
    assert spearman == pytest.approx(-0.5)
    fit = wamlab.fit_logistic_1d([-2.0, -1.0, 1.0, 2.0], [False, False, True, True])
    assert fit["separation"]
    auc, points, k_used = wamlab.roc_auc_cv(
        ["t"] * 20,
        [float(i) for i in range(20)],
        [i >= 10 for i in range(20)],
        k=5,
        seed=1,
    )
    assert auc == 1.0 and k_used == 5
    assert points[0] == (0.0, 0.0) and points[-1] == (1.0, 1.0)


def test_consensus_select():
    futures = [[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]]
    index, scores, weights = wamlab.consensus_select(futures)
    assert index in (0, 1)  # the outlier never wins
    assert len(scores) == 3 and len(weights) == 3
    assert sum(weights) == pytest.approx(1.0, abs=1e-9)
    z, degenerate = wamlab.zscore_per_task(
        ["a", "a", "a"], [1.0, 2.0, 3.0], [True, False, True]
    )
    assert z[1] == pytest.approx(0.0)
    assert degenerate == []


def test_episode_rollout_is_deterministic():
    task = wamlab.TaskSpec()
    task.task_id = "smoke_reach"
    task.family = wamlab.Family.POINT_REACH
    task.goal = [0.9, 0.1]
    task.noise_std = 0.02
    task.episode_horizon = 12

    wam = wamlab.WamSpec()
    wam.pred_noise_std = 0.2
    wam.policy_noise_std = 0.05
    wam.competence = 0.65
    wam.perturbed_noise_scale = 6.0

    sel = wamlab.SelectionConfig()
    sel.strategy = wamlab.Strategy.CONSISTENCY_CONSENSUS
    sel.n_candidates = 8

    line1 = wamlab.run_episode_json(task, wam, sel, master_seed=7, episode_index=0)
    line2 = wamlab.run_episode_json(task, wam, sel, master_seed=7, episode_index=0)
    assert line1 == line2

    record = json.loads(line1)
    assert record["task_id"] == "smoke_reach"
    assert record["strategy"] == "consensus"
    assert record["n_candidates"] == 8
    assert 0.0 < record["episode_consistency"] <= 1.0
    assert all(0.0 < s["c_t"] <= 1.0 for s in record["steps"])

    # an oracle model on a noiseless task predicts perfectly and succeeds
    task.noise_std = 0.0
    oracle = wamlab.WamSpec()
    perfect = json.loads(wamlab.run_episode_json(task, oracle, sel))
    assert perfect["success"]
    assert all(s["c_t"] == 1.0 for s in perfect["steps"])
