#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "nrs/corpus.hpp"

namespace nrs {

// Balanced toy corpus: items_per_combo items for each of the 5 party buckets x
// 4 sentiment bins, parties A/B governing, C/D opposition, E/F other.
struct SyntheticOptions {
  std::size_t items_per_combo = 25;
  std::size_t users = 50;
  std::size_t history_length = 30;
  std::size_t impressions_per_user = 4;
  std::size_t impression_size = 10;
  std::size_t story_clusters = 25;
  std::uint64_t seed = 7;
};

Corpus make_synthetic(const SyntheticOptions& opts = {});

// items.jsonl, history.csv, impressions.csv, party_map.json.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

}  // namespace nrs
