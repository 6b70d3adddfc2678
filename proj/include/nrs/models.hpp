#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrs/corpus.hpp"
#include "nrs/metrics.hpp"
#include "nrs/ntd.hpp"

namespace nrs {

enum class ModelKind { Random, RP3Beta, RWE, DRDW, PLD, EPD };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct ModelConfig {
  std::string name;  // output label; defaults to the kind name
  ModelKind kind = ModelKind::RP3Beta;
  std::size_t hops = 3;  // odd, >= 3
  double beta = 0.7;
  std::size_t list_size = 20;
  std::uint64_t seed = 0;
  std::optional<NTD> ntd;

  bool needs_ntd() const {
    return kind == ModelKind::DRDW || kind == ModelKind::PLD || kind == ModelKind::EPD;
  }
  void validate() const;
  static ModelConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ScoredItem {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

struct RankedList {
  std::string user_id;
  std::vector<ScoredItem> entries;

  std::vector<std::string> ids() const;
  bool operator==(const RankedList&) const = default;
};

// Everything a model reads. The matrix holds training interactions only; a
// user's row doubles as the history excluded from recommendations.
struct ModelContext {
  const InteractionMatrix* matrix = nullptr;
  const ItemCatalog* items = nullptr;
  std::vector<std::string> pool;

  std::set<std::string> history(std::string_view user) const;
};

// Exact distribution of an h-hop walk started at `user`, alternating
// row-normalized user->item and item->user transitions. Indexed like
// matrix.items(). Throws ColdUserError for users without interactions.
std::vector<double> walk_scores(const InteractionMatrix& matrix, std::string_view user,
                                std::size_t hops);

// Walk in which, after every item-side hop but the first, mass on the user's
// own items is erased and the rest renormalized. nullopt when everything is
// erased.
std::optional<std::vector<double>> erased_walk_scores(const InteractionMatrix& matrix,
                                                      std::string_view user, std::size_t hops);

// Uniform score in [0, 1) for (seed, user, item); a top-N by these scores is a
// uniform sample without replacement.
double random_score(std::uint64_t seed, std::string_view user, std::string_view item);

RankedList recommend_random(const ModelContext& ctx, const std::string& user,
                            const ModelConfig& cfg);
RankedList recommend_rp3b(const ModelContext& ctx, const std::string& user,
                          const ModelConfig& cfg);
// Falls back to recommend_random when erasure removes all mass; `fell_back`
// reports it.
RankedList recommend_rwe(const ModelContext& ctx, const std::string& user,
                         const ModelConfig& cfg, bool* fell_back = nullptr);

struct QuotaDeviation {
  std::string dimension;
  std::string class_label;
  long quota = 0;
  long count = 0;
};

struct DrdwResult {
  RankedList list;
  std::vector<QuotaDeviation> deviations;  // classes whose count != quota
};

DrdwResult recommend_drdw(const ModelContext& ctx, const std::string& user,
                          const ModelConfig& cfg);

// The shared agenda: one most-recent political item per story cluster, largest
// clusters first. Identical for every user.
RankedList pld_shared_list(const ModelContext& ctx, const ModelConfig& cfg);
std::map<std::string, RankedList> recommend_pld(const ModelContext& ctx,
                                                std::span<const std::string> users,
                                                const ModelConfig& cfg);

struct EpdResult {
  RankedList list;
  std::vector<std::string> warnings;
};

EpdResult recommend_epd(const ModelContext& ctx, const std::string& user,
                        const ModelConfig& cfg);

struct ModelOutput {
  RankedList list;
  std::vector<std::string> warnings;
};

// Dispatches on cfg.kind. Cold users of walk models fall back to random.
ModelOutput recommend(const ModelContext& ctx, const std::string& user, const ModelConfig& cfg);

// Parallel over users (OpenMP); output order follows `users`.
std::vector<ModelOutput> recommend_batch(const ModelContext& ctx,
                                         std::span<const std::string> users,
                                         const ModelConfig& cfg);
// Single-threaded reference.
std::vector<ModelOutput> recommend_batch_serial(const ModelContext& ctx,
                                                std::span<const std::string> users,
                                                const ModelConfig& cfg);

// Model scores for arbitrary items (used for impression AUC). Items the model
// cannot score get 0.
UserScores score_items(const ModelContext& ctx, const std::string& user, const ModelConfig& cfg,
                       std::span<const std::string> items);

}  // namespace nrs
