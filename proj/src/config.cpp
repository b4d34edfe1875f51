#include "wamlab/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "wamlab/errors.hpp"
#include "wamlab/log_io.hpp"

namespace wamlab {

namespace {

const std::set<std::string> kExperimentNames = {
    "separability", "collapse", "utility", "scaling", "mitigation"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Cursor {
  std::string source;
  int line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
  }
};

double parse_double(const Cursor& at, const std::string& key,
                    const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    at.fail("key '" + key + "': expected a number, got '" + v + "'");
  }
}

long long parse_int(const Cursor& at, const std::string& key,
                    const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    at.fail("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

uint64_t parse_u64(const Cursor& at, const std::string& key,
                   const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    at.fail("key '" + key + "': expected an unsigned integer, got '" + v + "'");
  }
}

bool parse_bool(const Cursor& at, const std::string& key,
                const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  at.fail("key '" + key + "': expected true/false, got '" + v + "'");
}

std::array<double, 2> parse_vec2(const Cursor& at, const std::string& key,
                                 const std::string& v) {
  const auto parts = split_list(v);
  if (parts.size() != 2) at.fail("key '" + key + "': expected 'x, y'");
  return {parse_double(at, key, parts[0]), parse_double(at, key, parts[1])};
}

void set_task_key(const Cursor& at, TaskSpec& t, const std::string& key,
                  const std::string& v) {
  if (key == "family") {
    try {
      t.family = family_from_name(v);
    } catch (const ConfigError& e) {
      at.fail(e.what());
    }
  } else if (key == "goal") {
    t.goal = parse_vec2(at, key, v);
  } else if (key == "success_radius") {
    t.success_radius = parse_double(at, key, v);
  } else if (key == "dt") {
    t.dt = parse_double(at, key, v);
  } else if (key == "max_speed") {
    t.max_speed = parse_double(at, key, v);
  } else if (key == "init_noise") {
    t.init_noise = parse_double(at, key, v);
  } else if (key == "noise_std") {
    t.noise_std = parse_double(at, key, v);
  } else if (key == "episode_horizon") {
    t.episode_horizon = static_cast<int>(parse_int(at, key, v));
  } else if (key == "control_horizon") {
    t.control_horizon = static_cast<int>(parse_int(at, key, v));
  } else if (key == "latent_dim") {
    t.latent_dim = static_cast<int>(parse_int(at, key, v));
  } else if (key == "block_start") {
    t.block_start = parse_vec2(at, key, v);
  } else if (key == "contact_radius") {
    t.contact_radius = parse_double(at, key, v);
  } else if (key == "stall_band_y") {
    t.stall_band_y = parse_double(at, key, v);
  } else if (key == "stall_factor") {
    t.stall_factor = parse_double(at, key, v);
  } else {
    at.fail("unknown task key '" + key + "'");
  }
}

void set_wam_key(const Cursor& at, WamSpec& w, const std::string& key,
                 const std::string& v) {
  if (key == "formulation") {
    try {
      w.formulation = formulation_from_name(v);
    } catch (const ConfigError& e) {
      at.fail(e.what());
    }
  } else if (key == "pred_noise_std") {
    w.pred_noise_std = parse_double(at, key, v);
  } else if (key == "bias") {
    w.bias.clear();
    for (const auto& item : split_list(v))
      w.bias.push_back(parse_double(at, key, item));
  } else if (key == "collapse") {
    if (v == "off") {
      w.collapse_mode = CollapseMode::kOff;
    } else if (v == "on_stall") {
      w.collapse_mode = CollapseMode::kOnStall;
    } else {
      at.fail("key 'collapse': expected off|on_stall, got '" + v + "'");
    }
  } else if (key == "stall_threshold") {
    w.stall_threshold = parse_double(at, key, v);
  } else if (key == "stall_persistence") {
    w.stall_persistence = static_cast<int>(parse_int(at, key, v));
  } else if (key == "policy_noise_std") {
    w.policy_noise_std = parse_double(at, key, v);
  } else if (key == "value_noise_std") {
    w.value_noise_std = parse_double(at, key, v);
  } else if (key == "value_miscalibration") {
    w.value_miscalibration = parse_double(at, key, v);
  } else if (key == "competence") {
    w.competence = parse_double(at, key, v);
  } else if (key == "perturbed_noise_scale") {
    w.perturbed_noise_scale = parse_double(at, key, v);
  } else if (key == "value_head") {
    w.value_head = parse_bool(at, key, v);
  } else {
    at.fail("unknown wam key '" + key + "'");
  }
}

}  // namespace

std::string default_output_dir() {
  const char* env = std::getenv("WAMLAB_OUT");
  return env != nullptr && *env != '\0' ? env : "out";
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& source_name) {
  RunConfig cfg;
  cfg.output_dir = default_output_dir();

  Cursor at{source_name, 0};
  std::string section;      // "run", "consistency", "selection", "experiments"
  std::string section_arg;  // task id / preset name
  TaskSpec* task = nullptr;
  WamSpec* wam = nullptr;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++at.line;
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      std::istringstream hs(inner);
      std::string kind, arg, extra;
      hs >> kind >> arg >> extra;
      if (!extra.empty()) at.fail("too many tokens in section header");
      task = nullptr;
      wam = nullptr;
      section = kind;
      section_arg = arg;
      if (kind == "task") {
        if (arg.empty()) at.fail("[task] needs an id: [task <id>]");
        for (const auto& t : cfg.suite) {
          if (t.task_id == arg) at.fail("duplicate task id '" + arg + "'");
        }
        TaskSpec t;
        t.task_id = arg;
        cfg.suite.push_back(t);
        task = &cfg.suite.back();
      } else if (kind == "wam") {
        if (arg.empty()) at.fail("[wam] needs a name: [wam <name>]");
        for (const auto& [name, w] : cfg.wam_presets) {
          if (name == arg) at.fail("duplicate wam preset '" + arg + "'");
        }
        cfg.wam_presets.emplace_back(arg, WamSpec{});
        wam = &cfg.wam_presets.back().second;
      } else if (kind == "run" || kind == "consistency" ||
                 kind == "selection" || kind == "experiments") {
        if (!arg.empty()) at.fail("section [" + kind + "] takes no argument");
      } else {
        at.fail("unknown section [" + inner + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");

    if (task != nullptr) {
      set_task_key(at, *task, key, value);
    } else if (wam != nullptr) {
      set_wam_key(at, *wam, key, value);
    } else if (section == "run") {
      if (key == "master_seed") {
        cfg.master_seed = parse_u64(at, key, value);
      } else if (key == "seeds") {
        cfg.seeds = static_cast<int>(parse_int(at, key, value));
      } else if (key == "output_dir") {
        cfg.output_dir = value;
      } else if (key == "jobs") {
        cfg.jobs = static_cast<int>(parse_int(at, key, value));
      } else if (key == "presets") {
        cfg.run_presets = split_list(value);
      } else if (key == "config_version") {
        cfg.config_version = static_cast<int>(parse_int(at, key, value));
      } else {
        at.fail("unknown run key '" + key + "'");
      }
    } else if (section == "consistency") {
      if (key == "alpha") {
        cfg.consistency.alpha = parse_double(at, key, value);
      } else if (key == "distance") {
        if (value != "mse") at.fail("only distance = mse is supported");
      } else {
        at.fail("unknown consistency key '" + key + "'");
      }
    } else if (section == "selection") {
      if (key == "strategies") {
        cfg.strategies.clear();
        for (const auto& name : split_list(value)) {
          try {
            cfg.strategies.push_back(strategy_from_name(name));
          } catch (const ConfigError& e) {
            at.fail(e.what());
          }
        }
      } else if (key == "candidates") {
        cfg.candidates.clear();
        for (const auto& item : split_list(value))
          cfg.candidates.push_back(static_cast<int>(parse_int(at, key, item)));
      } else if (key == "tau") {
        cfg.tau = parse_double(at, key, value);
      } else {
        at.fail("unknown selection key '" + key + "'");
      }
    } else if (section == "experiments") {
      if (key == "enabled") {
        cfg.experiments.clear();
        for (const auto& name : split_list(value)) {
          if (!kExperimentNames.count(name)) {
            at.fail("unknown experiment '" + name + "'");
          }
          cfg.experiments.insert(name);
        }
      } else if (key == "characterize_preset") {
        cfg.characterize_preset = value;
      } else if (key == "collapse_preset") {
        cfg.collapse_preset = value;
      } else if (key == "utility_preset") {
        cfg.utility_preset = value;
      } else if (key == "selection_preset") {
        cfg.selection_preset = value;
      } else if (key == "scaling_candidates") {
        cfg.scaling_candidates.clear();
        for (const auto& item : split_list(value))
          cfg.scaling_candidates.push_back(
              static_cast<int>(parse_int(at, key, item)));
      } else if (key == "scaling_seeds") {
        cfg.scaling_seeds = static_cast<int>(parse_int(at, key, value));
      } else if (key == "collapse_seeds") {
        cfg.collapse_seeds = static_cast<int>(parse_int(at, key, value));
      } else if (key == "utility_seeds") {
        cfg.utility_seeds = static_cast<int>(parse_int(at, key, value));
      } else if (key == "mitigation_seeds") {
        cfg.mitigation_seeds = static_cast<int>(parse_int(at, key, value));
      } else if (key == "mitigation_candidates") {
        cfg.mitigation_candidates = static_cast<int>(parse_int(at, key, value));
      } else {
        at.fail("unknown experiments key '" + key + "'");
      }
    } else if (section.empty()) {
      if (key == "config_version") {
        cfg.config_version = static_cast<int>(parse_int(at, key, value));
      } else {
        at.fail("key '" + key + "' outside any section");
      }
    } else {
      at.fail("key '" + key + "' in unexpected section [" + section + "]");
    }
  }

  if (cfg.strategies.empty()) cfg.strategies = {Strategy::kSingle};
  if (cfg.candidates.empty()) cfg.candidates = {8};
  if (cfg.run_presets.empty() && !cfg.wam_presets.empty()) {
    cfg.run_presets = {cfg.wam_presets.front().first};
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), path);
}

void apply_overrides(RunConfig& cfg, const Overrides& ov) {
  if (ov.master_seed) cfg.master_seed = *ov.master_seed;
  if (ov.seeds) cfg.seeds = *ov.seeds;
  if (ov.strategy) cfg.strategies = {strategy_from_name(*ov.strategy)};
  if (ov.candidates) cfg.candidates = {*ov.candidates};
  if (ov.alpha) cfg.consistency.alpha = *ov.alpha;
  if (ov.tau) cfg.tau = *ov.tau;
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  if (ov.jobs) cfg.jobs = *ov.jobs;
  validate_config(cfg);
}

const WamSpec& preset_or_throw(const RunConfig& cfg, const std::string& name) {
  for (const auto& [n, w] : cfg.wam_presets) {
    if (n == name) return w;
  }
  throw ConfigError("wam preset '" + name + "' is not defined in the config");
}

void validate_config(const RunConfig& cfg) {
  if (cfg.suite.empty()) throw ConfigError("config defines no tasks");
  if (cfg.wam_presets.empty()) throw ConfigError("config defines no wam presets");
  if (cfg.seeds < 1) throw ConfigError("seeds must be >= 1");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(cfg.consistency.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be > 0");
  for (const auto& t : cfg.suite) validate_task(t);
  for (const auto& [name, w] : cfg.wam_presets) validate_wam(w, name);
  for (const auto& name : cfg.run_presets) preset_or_throw(cfg, name);
  for (int n : cfg.candidates) {
    if (n < 1) throw ConfigError("candidates must be >= 1");
  }
  for (int n : cfg.scaling_candidates) {
    if (n < 1) throw ConfigError("scaling_candidates must be >= 1");
  }
  if (cfg.mitigation_candidates < 1) throw ConfigError("mitigation_candidates must be >= 1");
  if (cfg.experiments.count("separability")) preset_or_throw(cfg, cfg.characterize_preset);
  if (cfg.experiments.count("collapse") || cfg.experiments.count("mitigation")) {
    preset_or_throw(cfg, cfg.collapse_preset);
  }
  if (cfg.experiments.count("utility")) preset_or_throw(cfg, cfg.utility_preset);
  if (cfg.experiments.count("scaling")) preset_or_throw(cfg, cfg.selection_preset);
}

std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  auto d = [](double x) { return fmt_double(x); };

  out << "config_version = " << cfg.config_version << "\n";
  out << "[run]\n";
  out << "master_seed = " << cfg.master_seed << "\n";
  out << "seeds = " << cfg.seeds << "\n";
  out << "output_dir = " << cfg.output_dir << "\n";
  out << "jobs = " << cfg.jobs << "\n";
  std::vector<std::string> run_presets = cfg.run_presets;
  std::sort(run_presets.begin(), run_presets.end());
  out << "presets =";
  for (std::size_t i = 0; i < run_presets.size(); ++i)
    out << (i ? "," : " ") << run_presets[i];
  out << "\n";

  out << "[consistency]\n";
  out << "alpha = " << d(cfg.consistency.alpha) << "\n";
  out << "distance = mse\n";

  out << "[selection]\n";
  out << "strategies =";
  for (std::size_t i = 0; i < cfg.strategies.size(); ++i)
    out << (i ? "," : " ") << strategy_name(cfg.strategies[i]);
  out << "\n";
  out << "candidates =";
  for (std::size_t i = 0; i < cfg.candidates.size(); ++i)
    out << (i ? "," : " ") << cfg.candidates[i];
  out << "\n";
  out << "tau = " << d(cfg.tau) << "\n";

  out << "[experiments]\n";
  out << "enabled =";
  {
    std::size_t i = 0;
    for (const auto& name : cfg.experiments) out << (i++ ? "," : " ") << name;
  }
  out << "\n";
  out << "characterize_preset = " << cfg.characterize_preset << "\n";
  out << "collapse_preset = " << cfg.collapse_preset << "\n";
  out << "utility_preset = " << cfg.utility_preset << "\n";
  out << "selection_preset = " << cfg.selection_preset << "\n";
  out << "scaling_candidates =";
  for (std::size_t i = 0; i < cfg.scaling_candidates.size(); ++i)
    out << (i ? "," : " ") << cfg.scaling_candidates[i];
  out << "\n";
  out << "scaling_seeds = " << cfg.scaling_seeds << "\n";
  out << "collapse_seeds = " << cfg.collapse_seeds << "\n";
  out << "utility_seeds = " << cfg.utility_seeds << "\n";
  out << "mitigation_seeds = " << cfg.mitigation_seeds << "\n";
  out << "mitigation_candidates = " << cfg.mitigation_candidates << "\n";

  std::vector<TaskSpec> tasks = cfg.suite;
  std::sort(tasks.begin(), tasks.end(),
            [](const TaskSpec& a, const TaskSpec& b) { return a.task_id < b.task_id; });
  for (const auto& t : tasks) {
    out << "[task " << t.task_id << "]\n";
    out << "family = " << family_name(t.family) << "\n";
    out << "goal = " << d(t.goal[0]) << "," << d(t.goal[1]) << "\n";
    out << "success_radius = " << d(t.success_radius) << "\n";
    out << "dt = " << d(t.dt) << "\n";
    out << "max_speed = " << d(t.max_speed) << "\n";
    out << "init_noise = " << d(t.init_noise) << "\n";
    out << "noise_std = " << d(t.noise_std) << "\n";
    out << "episode_horizon = " << t.episode_horizon << "\n";
    out << "control_horizon = " << t.control_horizon << "\n";
    out << "latent_dim = " << t.latent_dim << "\n";
    if (t.family == Family::kPushBlock) {
      out << "block_start = " << d(t.block_start[0]) << "," << d(t.block_start[1]) << "\n";
      out << "contact_radius = " << d(t.contact_radius) << "\n";
    }
    if (t.family == Family::kStallTrap) {
      out << "stall_band_y = " << d(t.stall_band_y) << "\n";
      out << "stall_factor = " << d(t.stall_factor) << "\n";
    }
  }

  std::vector<std::pair<std::string, WamSpec>> presets = cfg.wam_presets;
  std::sort(presets.begin(), presets.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [name, w] : presets) {
    out << "[wam " << name << "]\n";
    out << "formulation = " << formulation_name(w.formulation) << "\n";
    out << "pred_noise_std = " << d(w.pred_noise_std) << "\n";
    if (!w.bias.empty()) {
      out << "bias =";
      for (std::size_t i = 0; i < w.bias.size(); ++i)
        out << (i ? "," : " ") << d(w.bias[i]);
      out << "\n";
    }
    out << "collapse = "
        << (w.collapse_mode == CollapseMode::kOnStall ? "on_stall" : "off") << "\n";
    out << "stall_threshold = " << d(w.stall_threshold) << "\n";
    out << "stall_persistence = " << w.stall_persistence << "\n";
    out << "policy_noise_std = " << d(w.policy_noise_std) << "\n";
    out << "value_noise_std = " << d(w.value_noise_std) << "\n";
    out << "value_miscalibration = " << d(w.value_miscalibration) << "\n";
    out << "competence = " << d(w.competence) << "\n";
    out << "perturbed_noise_scale = " << d(w.perturbed_noise_scale) << "\n";
    out << "value_head = " << (w.value_head ? "true" : "false") << "\n";
  }
  return out.str();
}

std::string config_fingerprint(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_config_text(cfg))));
  return buf;
}

}  // namespace wamlab
