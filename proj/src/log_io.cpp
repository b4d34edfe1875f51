#include "wamlab/log_io.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace wamlab {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json step_to_json(const StepDiagnostics& s) {
  ordered_json j;
  j["t"] = s.t;
  j["c_t"] = s.c_t;
  j["delta_z"] = s.delta_z;
  j["chosen_branch"] = s.chosen_branch;
  j["branch_scores"] = s.branch_scores;
  if (s.value_pred.has_value()) {
    j["value_pred"] = *s.value_pred;
  } else {
    j["value_pred"] = nullptr;
  }
  return j;
}

StepDiagnostics step_from_json(const ordered_json& j) {
  StepDiagnostics s;
  s.t = j.at("t").get<int>();
  s.c_t = j.at("c_t").get<double>();
  s.delta_z = j.at("delta_z").get<double>();
  s.chosen_branch = j.at("chosen_branch").get<int>();
  s.branch_scores = j.at("branch_scores").get<std::vector<double>>();
  if (!j.at("value_pred").is_null()) {
    s.value_pred = j.at("value_pred").get<double>();
  }
  return s;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string fmt_double(double x) { return ordered_json(x).dump(); }

std::string episode_to_jsonl(const EpisodeLog& e) {
  ordered_json j;
  j["task_id"] = e.task_id;
  j["episode_seed"] = e.episode_seed;
  j["wam_preset"] = e.wam_preset;
  j["strategy"] = e.strategy;
  j["n_candidates"] = e.n_candidates;
  ordered_json steps = ordered_json::array();
  for (const auto& s : e.steps) steps.push_back(step_to_json(s));
  j["steps"] = std::move(steps);
  j["success"] = e.success;
  j["episode_consistency"] = e.episode_consistency;
  if (e.stall_onset.has_value()) {
    j["stall_onset"] = *e.stall_onset;
  } else {
    j["stall_onset"] = nullptr;
  }
  j["total_exploration_cost"] = e.total_exploration_cost;
  return j.dump();
}

EpisodeLog episode_from_jsonl(const std::string& line) {
  const ordered_json j = ordered_json::parse(line);
  EpisodeLog e;
  e.task_id = j.at("task_id").get<std::string>();
  e.episode_seed = j.at("episode_seed").get<uint64_t>();
  e.wam_preset = j.at("wam_preset").get<std::string>();
  e.strategy = j.at("strategy").get<std::string>();
  e.n_candidates = j.at("n_candidates").get<int>();
  for (const auto& s : j.at("steps")) e.steps.push_back(step_from_json(s));
  e.success = j.at("success").get<bool>();
  e.episode_consistency = j.at("episode_consistency").get<double>();
  if (!j.at("stall_onset").is_null()) {
    e.stall_onset = j.at("stall_onset").get<int>();
  }
  e.total_exploration_cost = j.at("total_exploration_cost").get<int>();
  return e;
}

void write_episodes(const std::filesystem::path& path,
                    const std::vector<EpisodeLog>& episodes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    for (const auto& e : episodes) f << episode_to_jsonl(e) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::vector<EpisodeLog> read_episodes(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
  std::vector<EpisodeLog> episodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      episodes.push_back(episode_from_jsonl(line));
    } catch (const std::exception& ex) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": bad episode record: " + ex.what());
    }
  }
  return episodes;
}

void save_dataset(const std::filesystem::path& dir, const RunDataset& ds,
                  const std::string& canonical_config, uint64_t master_seed,
                  const SuitePlan* plan) {
  std::filesystem::create_directories(dir);
  write_episodes(dir / "episodes.jsonl", ds.episodes);

  ordered_json meta;
  meta["config_fingerprint"] = ds.config_fingerprint;
  meta["master_seed"] = master_seed;
  meta["episodes"] = ds.episodes.size();
  if (plan != nullptr) {
    ordered_json manifest;
    ordered_json tasks = ordered_json::array();
    for (const auto& t : plan->tasks) tasks.push_back(t.task_id);
    manifest["tasks"] = std::move(tasks);
    ordered_json presets = ordered_json::array();
    for (const auto& [name, w] : plan->presets) presets.push_back(name);
    manifest["wam_presets"] = std::move(presets);
    ordered_json cells = ordered_json::array();
    for (const auto& sel : plan->selections) {
      ordered_json cell;
      cell["strategy"] = strategy_name(sel.strategy);
      cell["n_candidates"] = sel.n_candidates;
      cell["tau"] = sel.tau;
      cells.push_back(std::move(cell));
    }
    manifest["selections"] = std::move(cells);
    manifest["seeds"] = plan->seeds;
    meta["suite_manifest"] = std::move(manifest);
  }
  ordered_json alignment;
  for (const auto& [task, a] : ds.alignment) alignment[task] = alignment_name(a);
  meta["alignment"] = std::move(alignment);
  meta["canonical_config"] = canonical_config;
  meta["written_at"] = utc_timestamp();

  std::ofstream f(dir / "run_meta.json");
  if (!f) throw std::runtime_error("cannot write run_meta.json in '" + dir.string() + "'");
  f << meta.dump(2) << '\n';
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  std::filesystem::path jsonl = path;
  std::filesystem::path meta_path;
  if (std::filesystem::is_directory(path)) {
    jsonl = path / "episodes.jsonl";
    meta_path = path / "run_meta.json";
  } else {
    meta_path = path.parent_path() / "run_meta.json";
  }
  LoadedDataset out;
  out.dataset.episodes = read_episodes(jsonl);
  out.dataset.alignment = compute_alignment(out.dataset.episodes);
  if (std::filesystem::exists(meta_path)) {
    std::ifstream f(meta_path);
    const ordered_json meta = ordered_json::parse(f);
    out.dataset.config_fingerprint =
        meta.value("config_fingerprint", std::string{});
    out.master_seed = meta.value("master_seed", uint64_t{0});
  }
  return out;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    f << header[i] << (i + 1 < header.size() ? "," : "");
  }
  f << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      f << row[i] << (i + 1 < row.size() ? "," : "");
    }
    f << '\n';
  }
}

}  // namespace wamlab
