#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrs/corpus.hpp"
#include "nrs/metrics.hpp"
#include "nrs/models.hpp"
#include "nrs/ntd.hpp"
#include "nrs/rerank.hpp"
#include "nrs/simulate.hpp"
#include "nrs/split.hpp"

namespace nrs {

enum class Stage { Pre = 0, In = 1, Post = 2, Eval = 3 };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct CorpusPaths {
  std::filesystem::path items;
  std::filesystem::path history;
  std::filesystem::path impressions;
  std::filesystem::path party_map;
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  CorpusPaths corpus;
  // nullopt: union of impression items.
  std::optional<std::vector<std::string>> article_pool;
  bool pool_from_catalog = false;
  CleanOptions clean;
  std::optional<SplitSpec> split;
  NTD ntd = default_ntd();
  std::size_t list_size = 20;
  std::optional<std::size_t> candidate_size;
  std::vector<ModelConfig> models;
  std::vector<RerankConfig> rerankers;
  std::optional<BehaviorConfig> behavior;
  EvalOptions metrics;
  NtvTargets ntv_targets;

  void validate() const;
  // Relative paths resolve against `base_dir`. Component seeds default to the
  // global seed.
  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  // Changes the global seed and every seed that was derived from it.
  void override_seed(std::uint64_t seed);

  // Canonical config subsection owned by each stage.
  nlohmann::json stage_section(Stage s) const;

  // Candidates per model: the configured candidate_size, else list_size for
  // normative models and max(100, list_size) for the others.
  std::size_t candidates_for(const ModelConfig& m) const;

 private:
  std::map<std::string, bool> explicit_seeds_;
};

// Cleaned corpus with histories restricted to the training side of the split.
struct PreparedData {
  Corpus corpus;
  CleanReport clean_report;
  std::vector<std::string> pool;
  Split split;
  InteractionMatrix matrix;
  std::vector<std::string> users;  // users to recommend for, sorted
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct StageRecord {
  std::string fingerprint;
  nlohmann::json config;
  std::map<std::string, std::string> files;  // relative path -> sha256
};

struct Manifest {
  std::map<Stage, StageRecord> stages;

  nlohmann::ordered_json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  static Manifest load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

struct SaveState {
  std::filesystem::path dir;
  Manifest manifest;
  std::vector<std::string> warnings;
};

std::string fingerprint(const nlohmann::json& section);

// Checks that every stage before `from` is recorded, fingerprint-matches the
// config and that its files exist with matching hashes. Throws
// ValidationError naming the stage otherwise.
void verify_prior_stages(const ExperimentConfig& cfg, const Manifest& manifest, Stage from);

// Runs stages from..to (inclusive).
SaveState run(const ExperimentConfig& cfg, Stage from = Stage::Pre, Stage to = Stage::Eval);

std::string recommendations_file(const std::string& model, const std::string& reranker);

nlohmann::ordered_json export_jrex(const std::vector<RankedList>& recommendations,
                                   const std::string& experiment_id, const std::string& style);
std::vector<RankedList> parse_jrex(const nlohmann::json& doc);

// The NTV row, then one row per model x reranker.
std::string report_csv(const nlohmann::json& report, int precision = 6);

}  // namespace nrs
