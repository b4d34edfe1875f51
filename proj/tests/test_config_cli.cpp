#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wamlab/commands.hpp"
#include "wamlab/config.hpp"
#include "wamlab/errors.hpp"
#include "wamlab/log_io.hpp"

using namespace wamlab;
namespace fs = std::filesystem;

namespace {

const char* kMinimalConfig = R"cfg(
config_version = 1
[run]
master_seed = 5
seeds = 4
presets = toy

[selection]
strategies = single
candidates = 1

[task mini]
family = point_reach
goal = 0.8, 0.0
episode_horizon = 10
noise_std = 0.02

[wam toy]
formulation = joint
pred_noise_std = 0.15
perturbed_noise_scale = 4
policy_noise_std = 0.05
competence = 0.6
)cfg";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wamlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunConfig minimal_config(const fs::path& out_dir) {
  RunConfig cfg = parse_config_text(kMinimalConfig, "minimal");
  cfg.output_dir = out_dir.string();
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("config_cli");

TEST_CASE("minimal config parses with defaults") {
  const RunConfig cfg = parse_config_text(kMinimalConfig, "minimal");
  CHECK(cfg.master_seed == 5);
  CHECK(cfg.seeds == 4);
  CHECK(cfg.consistency.alpha == 0.1);
  CHECK(cfg.tau == 1.0);
  REQUIRE(cfg.suite.size() == 1);
  CHECK(cfg.suite[0].task_id == "mini");
  CHECK(cfg.suite[0].family == Family::kPointReach);
  REQUIRE(cfg.wam_presets.size() == 1);
  CHECK(cfg.wam_presets[0].first == "toy");
  CHECK(cfg.run_presets == std::vector<std::string>{"toy"});
}

TEST_CASE("parse errors carry file and line diagnostics") {
  auto expect_error = [](const std::string& text, const std::string& fragment) {
    try {
      parse_config_text(text, "bad.cfg");
      FAIL("expected ConfigError for: ", fragment);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("bad.cfg:") != std::string::npos);
      CHECK(msg.find(fragment) != std::string::npos);
    }
  };
  expect_error("[run]\nmaster_seed 5\n", "key = value");
  expect_error("[run]\nbogus_key = 1\n", "bogus_key");
  expect_error("[task]\n", "[task] needs an id");
  expect_error("[nonsense]\n", "unknown section");
  expect_error("[task a]\nfamily = hovercraft\n", "hovercraft");
  expect_error("[selection]\nstrategies = psychic\n", "psychic");
  expect_error("[experiments]\nenabled = warp\n", "warp");
  expect_error("[task a]\ngoal = 1\n", "expected 'x, y'");
  expect_error("[run]\nseeds = many\n", "expected an integer");
}

TEST_CASE("validation: missing preset is named, bad parameters rejected") {
  try {
    parse_config_text(
        std::string("config_version = 1\n[run]\npresets = ghost\n") +
            "[task a]\nfamily = point_reach\n" + "[wam real]\n",
        "cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("[task a]\nsuccess_radius = 0\n[wam w]\n", "cfg"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[task a]\n[wam w]\ncompetence = 1.5\n", "cfg"),
                  ConfigError);
}

TEST_CASE("fingerprint is recomputable from the canonical text") {
  const RunConfig cfg = parse_config_text(kMinimalConfig, "minimal");
  const std::string canon = canonical_config_text(cfg);
  const RunConfig reparsed = parse_config_text(canon, "canon");
  CHECK(canonical_config_text(reparsed) == canon);
  CHECK(config_fingerprint(reparsed) == config_fingerprint(cfg));

  RunConfig changed = cfg;
  changed.master_seed ^= 1;
  CHECK(config_fingerprint(changed) != config_fingerprint(cfg));
}

TEST_CASE("overrides change the effective config") {
  RunConfig cfg = parse_config_text(kMinimalConfig, "minimal");
  Overrides ov;
  ov.master_seed = 99;
  ov.strategy = "consensus";
  ov.candidates = 8;
  ov.alpha = 0.2;
  apply_overrides(cfg, ov);
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.strategies == std::vector<Strategy>{Strategy::kConsistencyConsensus});
  CHECK(cfg.candidates == std::vector<int>{8});
  CHECK(cfg.consistency.alpha == 0.2);
  ov.strategy = "telepathy";
  CHECK_THROWS_AS(apply_overrides(cfg, ov), ConfigError);
}

TEST_CASE("cmd_run writes a dataset and echoes the configured cell") {
  const fs::path dir = fresh_dir("run");
  RunConfig cfg = minimal_config(dir);
  Overrides ov;
  ov.strategy = "consensus";
  ov.candidates = 8;
  apply_overrides(cfg, ov);
  std::ostringstream out;
  CHECK(cmd_run(cfg, out) == 0);
  CHECK(out.str().find("strategy=consensus N=8") != std::string::npos);
  CHECK(fs::exists(dir / "episodes.jsonl"));
  CHECK(fs::exists(dir / "run_meta.json"));
}

TEST_CASE("cmd_run twice produces byte-identical datasets") {
  const fs::path dir1 = fresh_dir("det1");
  const fs::path dir2 = fresh_dir("det2");
  RunConfig cfg = minimal_config(dir1);
  std::ostringstream sink;
  cmd_run(cfg, sink);
  cfg.output_dir = dir2.string();
  cmd_run(cfg, sink);
  CHECK(slurp(dir1 / "episodes.jsonl") == slurp(dir2 / "episodes.jsonl"));
}

TEST_CASE("run_meta fingerprint matches a recomputation from the stored config") {
  const fs::path dir = fresh_dir("meta");
  const RunConfig cfg = minimal_config(dir);
  std::ostringstream sink;
  cmd_run(cfg, sink);
  const std::string meta = slurp(dir / "run_meta.json");
  CHECK(meta.find(config_fingerprint(cfg)) != std::string::npos);
  // the stored canonical text reparses to the same fingerprint
  const RunConfig reparsed = parse_config_text(canonical_config_text(cfg), "meta");
  CHECK(config_fingerprint(reparsed) == config_fingerprint(cfg));
}

TEST_CASE("cmd_analyze emits the three reports; planted separation gives AUC 1") {
  const fs::path dir = fresh_dir("analyze");
  RunDataset ds;
  RngStream rs(3);
  for (const std::string task : {"t1", "t2"}) {
    for (int i = 0; i < 12; ++i) {
      EpisodeLog e;
      e.task_id = task;
      e.episode_seed = static_cast<uint64_t>(i);
      e.wam_preset = "toy";
      e.strategy = "single";
      e.n_candidates = 1;
      e.success = i < 6;
      StepDiagnostics s;
      s.c_t = (e.success ? 0.9 : 0.3) + 0.01 * rs.uniform();
      s.delta_z = 0.1;
      e.steps.push_back(s);
      e.episode_consistency = e.steps[0].c_t;
      ds.episodes.push_back(e);
    }
  }
  ds.alignment = compute_alignment(ds.episodes);
  save_dataset(dir, ds, "canonical", 9);

  std::ostringstream out;
  CHECK(cmd_analyze(dir, dir, out) == 0);
  CHECK(fs::exists(dir / "zscores.csv"));
  CHECK(fs::exists(dir / "roc_points.csv"));
  CHECK(fs::exists(dir / "per_task.csv"));
  CHECK(out.str().find("auc=1") != std::string::npos);

  // rerunning the analysis is pure
  const std::string first = slurp(dir / "zscores.csv") + slurp(dir / "per_task.csv");
  std::ostringstream out2;
  cmd_analyze(dir, dir, out2);
  CHECK(slurp(dir / "zscores.csv") + slurp(dir / "per_task.csv") == first);
}

TEST_CASE("cmd_analyze: single-class dataset warns, partial report, exit 0") {
  const fs::path dir = fresh_dir("oneclass");
  RunDataset ds;
  for (int i = 0; i < 5; ++i) {
    EpisodeLog e;
    e.task_id = "t";
    e.episode_seed = static_cast<uint64_t>(i);
    e.wam_preset = "toy";
    e.strategy = "single";
    e.success = true;  // oracle-like all-success run
    StepDiagnostics s;
    s.c_t = 1.0;
    e.steps.push_back(s);
    e.episode_consistency = 1.0;
    ds.episodes.push_back(e);
  }
  ds.alignment = compute_alignment(ds.episodes);
  save_dataset(dir, ds, "canonical", 9);
  std::ostringstream out;
  CHECK(cmd_analyze(dir, dir, out) == 0);
  CHECK(out.str().find("warning") != std::string::npos);
  CHECK(fs::exists(dir / "zscores.csv"));
  CHECK(!fs::exists(dir / "roc_points.csv"));
  // every task is undetermined in the per-task table
  const std::string per_task = slurp(dir / "per_task.csv");
  CHECK(per_task.find("undetermined") != std::string::npos);
}

TEST_CASE("cmd_experiment rejects unknown names, listing the valid ones") {
  const RunConfig cfg = minimal_config(fresh_dir("exp"));
  std::ostringstream out;
  try {
    cmd_experiment("warpdrive", cfg, out);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("warpdrive") != std::string::npos);
    CHECK(msg.find("separability") != std::string::npos);
    CHECK(msg.find("mitigation") != std::string::npos);
  }
}

TEST_CASE("scaling experiment requires the consensus strategy") {
  RunConfig cfg = minimal_config(fresh_dir("scalereq"));
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_experiment("scaling", cfg, out), ConfigError);
}

TEST_CASE("cmd_experiment writes each experiment's CSVs") {
  const fs::path dir = fresh_dir("expcsv");
  RunConfig cfg = minimal_config(dir);
  cfg.characterize_preset = "toy";
  cfg.collapse_preset = "toy";
  cfg.utility_preset = "toy";
  cfg.selection_preset = "toy";
  cfg.collapse_seeds = 8;
  cfg.utility_seeds = 8;
  cfg.mitigation_seeds = 6;
  cfg.mitigation_candidates = 4;
  cfg.scaling_seeds = 6;
  cfg.scaling_candidates = {1, 4};
  cfg.strategies = {Strategy::kConsistencyConsensus};
  std::ostringstream out;

  CHECK(cmd_experiment("separability", cfg, out) == 0);
  CHECK(fs::exists(dir / "separability" / "zscores.csv"));
  CHECK(fs::exists(dir / "separability" / "per_task.csv"));

  CHECK(cmd_experiment("collapse", cfg, out) == 0);
  CHECK(fs::exists(dir / "collapse" / "collapse_dz.csv"));
  CHECK(fs::exists(dir / "collapse" / "collapse_summary.csv"));
  CHECK(fs::exists(dir / "collapse" / "alignment.csv"));
  CHECK(slurp(dir / "collapse" / "collapse_dz.csv")
            .find("aligned_success,aligned_failure,misaligned_success,"
                  "misaligned_failure") != std::string::npos);

  CHECK(cmd_experiment("utility", cfg, out) == 0);
  CHECK(fs::exists(dir / "utility" / "value_gap.csv"));
  CHECK(fs::exists(dir / "utility" / "consistency_gap.csv"));

  CHECK(cmd_experiment("scaling", cfg, out) == 0);
  const std::string scaling = slurp(dir / "scaling" / "scaling.csv");
  CHECK(scaling.find("strategy,n,success_rate,episodes") != std::string::npos);
  CHECK(scaling.find("consensus,1,") != std::string::npos);
  CHECK(scaling.find("consensus,4,") != std::string::npos);

  CHECK(cmd_experiment("mitigation", cfg, out) == 0);
  const std::string hl = slurp(dir / "mitigation" / "mitigation_hl.csv");
  CHECK(hl.find("step,delta_z_diff,c_diff,pairs") != std::string::npos);
}

TEST_CASE("cmd_report bundles analysis, experiments and a summary") {
  const fs::path dir = fresh_dir("report");
  RunConfig cfg = minimal_config(dir);
  cfg.seeds = 6;
  cfg.experiments = {"scaling"};
  cfg.strategies = {Strategy::kSingle, Strategy::kConsistencyConsensus};
  cfg.scaling_candidates = {1, 4};
  cfg.scaling_seeds = 6;
  cfg.selection_preset = "toy";
  std::ostringstream out;
  CHECK(cmd_report(cfg, out) == 0);
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "analysis" / "zscores.csv"));
  CHECK(fs::exists(dir / "scaling" / "scaling.csv"));
  const std::string summary = slurp(dir / "summary.txt");
  CHECK(summary.find("success_rate") != std::string::npos);
}

TEST_CASE("WAMLAB_OUT provides the default output dir") {
  setenv("WAMLAB_OUT", "/tmp/wamlab_env_out", 1);
  const RunConfig cfg = parse_config_text(kMinimalConfig, "minimal");
  CHECK(cfg.output_dir == "/tmp/wamlab_env_out");
  unsetenv("WAMLAB_OUT");
  const RunConfig plain = parse_config_text(kMinimalConfig, "minimal");
  CHECK(plain.output_dir == "out");
  // an explicit [run] output_dir wins over the environment
  setenv("WAMLAB_OUT", "/tmp/wamlab_env_out", 1);
  const RunConfig explicit_dir = parse_config_text(
      std::string(kMinimalConfig) + "\n[run]\noutput_dir = chosen\n", "minimal");
  CHECK(explicit_dir.output_dir == "chosen");
  unsetenv("WAMLAB_OUT");
}

#ifdef WAMLAB_CONFIG_DIR
TEST_CASE("shipped configs parse and every preset rolls an episode") {
  const RunConfig cfg =
      parse_config_file(std::string(WAMLAB_CONFIG_DIR) + "/default.cfg");
  CHECK(cfg.suite.size() == 12);
  const std::vector<std::string> expected{"oracle", "noisy", "biased", "collapse",
                                          "inverse"};
  for (const auto& name : expected) {
    const WamSpec& preset = preset_or_throw(cfg, name);
    const EpisodeLog log = run_episode(cfg.suite.front(), preset,
                                       {Strategy::kConsistencyConsensus, 4, 1.0},
                                       cfg.consistency, cfg.master_seed, 0);
    CHECK(!log.steps.empty());
    for (const auto& s : log.steps) {
      CHECK(s.c_t > 0.0);
      CHECK(s.c_t <= 1.0);
      CHECK(s.delta_z >= 0.0);
    }
  }
  const RunConfig bimodal =
      parse_config_file(std::string(WAMLAB_CONFIG_DIR) + "/bimodal.cfg");
  CHECK(bimodal.suite.size() == 1);
  CHECK(bimodal.suite.front().goal[0] < 0.0);  // goal behind the agent
}

TEST_CASE("shipped suite: gap curves share sign and value gap is positive") {
  const RunConfig cfg =
      parse_config_file(std::string(WAMLAB_CONFIG_DIR) + "/default.cfg");
  SuitePlan plan;
  plan.tasks = cfg.suite;
  plan.presets = {{cfg.utility_preset, preset_or_throw(cfg, cfg.utility_preset)}};
  plan.selections = {{Strategy::kSingle, 1, cfg.tau}};
  plan.consistency = cfg.consistency;
  plan.seeds = cfg.utility_seeds;
  const UtilityGapReport rep = experiment_utility_gap(plan, cfg.master_seed);
  const std::size_t n = std::min(rep.value_gap.gap.size(), rep.consistency_gap.gap.size());
  REQUIRE(n > 4);
  int shared = 0, value_positive = 0;
  for (std::size_t t = 0; t < n; ++t) {
    shared += (rep.value_gap.gap[t] >= 0.0) == (rep.consistency_gap.gap[t] >= 0.0);
    value_positive += rep.value_gap.gap[t] > 0.0 ? 1 : 0;
  }
  // the calibrated value head separates outcomes, and consistency follows it
  CHECK(value_positive * 2 > static_cast<int>(n));
  CHECK(shared * 10 >= static_cast<int>(n) * 7);
}

TEST_CASE("shipped suite: without collapse at least 80% of tasks stay aligned") {
  const RunConfig cfg =
      parse_config_file(std::string(WAMLAB_CONFIG_DIR) + "/default.cfg");
  SuitePlan plan;
  plan.tasks = cfg.suite;
  plan.presets = {{"noisy", preset_or_throw(cfg, "noisy")}};
  plan.selections = {{Strategy::kSingle, 1, cfg.tau}};
  plan.consistency = cfg.consistency;
  plan.seeds = cfg.collapse_seeds;
  const CollapseReport rep = experiment_collapse(plan, cfg.master_seed);
  int aligned = 0;
  for (const auto& [task, a] : rep.alignment) {
    aligned += a == Alignment::kAligned ? 1 : 0;
  }
  CHECK(aligned * 10 >= static_cast<int>(rep.alignment.size()) * 8);
}
#endif

#ifdef WAMLAB_CLI_PATH
TEST_CASE("CLI binary: exit codes for usage and config errors") {
  const std::string cli = WAMLAB_CLI_PATH;
  const fs::path dir = fresh_dir("cli");
  const fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "[run]\nbogus = 1\n";

  auto run_cli = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > " + (dir / "out.txt").string() +
                            " 2> " + (dir / "err.txt").string();
    const int raw = std::system(cmd.c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(run_cli("run --config " + bad.string()) == 2);
  CHECK(run_cli("experiment warp --config " + bad.string()) == 2);
  CHECK(run_cli("analyze " + (dir / "missing").string()) == 1);

  const fs::path good = dir / "good.cfg";
  std::ofstream(good) << kMinimalConfig;
  CHECK(run_cli("run --config " + good.string() + " --out " + (dir / "o").string() +
                " --seeds 2") == 0);
  CHECK(fs::exists(dir / "o" / "episodes.jsonl"));
}
#endif

TEST_SUITE_END();
