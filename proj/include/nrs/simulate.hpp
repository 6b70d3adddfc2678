#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrs/corpus.hpp"
#include "nrs/models.hpp"
#include "nrs/rerank.hpp"

namespace nrs {

// POS: position only. ATT: party and sentiment-bin matches. Category: category match.
enum class BehaviorMode { POS, ATT, Category };

std::string_view to_string(BehaviorMode m);
std::optional<BehaviorMode> parse_behavior_mode(std::string_view s);

struct BehaviorConfig {
  BehaviorMode mode = BehaviorMode::POS;
  double position_decay = 0.85;   // rho
  double category_boost = 3.0;    // kappa
  double attribute_boost = 3.0;
  std::size_t clicks_per_session = 2;
  std::size_t loops = 5;
  std::uint64_t seed = 0;

  void validate() const;
  static BehaviorConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Attribute classes seen in a user's history.
struct UserProfile {
  std::set<std::string> categories;
  std::set<PartyLabel> parties;
  std::set<std::size_t> sentiment_bins;
};

UserProfile build_profile(const std::vector<std::string>& history, const ItemCatalog& items);

// Position weight rho^(r-1) times the mode's boost, normalized to sum to 1.
std::vector<double> click_probabilities(const RankedList& list, const ItemCatalog& items,
                                        const UserProfile& profile, const BehaviorConfig& b);

struct SimLoop {
  std::size_t loop = 0;
  RankedList shown;
  std::vector<std::string> clicked;
  RankedList post;
};

struct SimLog {
  std::string user_id;
  std::vector<SimLoop> loops;
  bool ended_early = false;

  // One JSON line per loop, plus a closing line when the run ended early.
  std::string to_jsonl() const;
};

// Seeded per user with seed ^ fnv1a(user_id). `dap` supplies the NTD, gamma
// and the shown list size.
SimLog run_simulation(const RankedList& candidates, const ItemCatalog& items,
                      const UserProfile& profile, const RerankConfig& dap,
                      const BehaviorConfig& b);

// Draws k distinct indices by successive renormalized draws.
std::vector<std::size_t> sample_without_replacement(std::vector<double> weights, std::size_t k,
                                                    std::uint64_t& state);

}  // namespace nrs
