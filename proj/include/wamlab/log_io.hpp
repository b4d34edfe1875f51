#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wamlab/harness.hpp"

namespace wamlab {

// Shortest round-trip decimal form; used everywhere a double lands in a
// data file so reruns are byte-identical.
std::string fmt_double(double x);

std::string episode_to_jsonl(const EpisodeLog& episode);
EpisodeLog episode_from_jsonl(const std::string& line);

// episodes.jsonl, one stable-key-order object per line. Written via a
// temporary file and renamed, so failed runs leave no partial dataset.
void write_episodes(const std::filesystem::path& path,
                    const std::vector<EpisodeLog>& episodes);
std::vector<EpisodeLog> read_episodes(const std::filesystem::path& path);

// Dataset directory = episodes.jsonl + run_meta.json. The sidecar carries
// the config fingerprint, canonical config text, suite manifest, alignment
// and the run's only timestamp.
void save_dataset(const std::filesystem::path& dir, const RunDataset& ds,
                  const std::string& canonical_config, uint64_t master_seed,
                  const SuitePlan* plan = nullptr);

struct LoadedDataset {
  RunDataset dataset;
  uint64_t master_seed = 0;
};

// Accepts the dataset directory or the episodes.jsonl path itself.
// Alignment is recomputed from the episodes; fingerprint and master seed
// come from the sidecar when present.
LoadedDataset load_dataset(const std::filesystem::path& path);

// Minimal CSV writer; cells are pre-formatted strings.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace wamlab
