#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrs/corpus.hpp"
#include "nrs/models.hpp"
#include "nrs/ntd.hpp"

namespace nrs {

enum class RerankMethod { None, MMR, PM2, GKL, DAP };

std::string_view to_string(RerankMethod m);
std::optional<RerankMethod> parse_rerank_method(std::string_view s);

struct RerankConfig {
  std::string name;  // output label; defaults to the method name
  RerankMethod method = RerankMethod::None;
  double lambda = 0.5;
  NTD ntd = default_ntd();
  std::size_t list_size = 20;
  double dap_penalty = 0.5;  // gamma

  void validate() const;
  static RerankConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;  // without the NTD
};

struct SessionState {
  std::string user_id;
  std::set<std::string> clicked;
  // One multiset of clicked class indices per NTD dimension.
  std::vector<std::multiset<std::size_t>> clicked_classes;
  std::size_t session_index = 0;

  // Records a click; the item must be classifiable on every NTD dimension.
  void record_click(const Item& item, const NTD& ntd);
};

// Class index of `item` on every NTD dimension. Throws ValidationError if any
// is missing.
std::vector<std::size_t> classify(const Item& item, const NTD& ntd);

// Min-max normalized scores; a constant list normalizes to all ones.
std::vector<double> normalize_scores(const RankedList& list);

// Concatenated one-hot class vectors over the NTD dimensions.
std::vector<double> one_hot_features(const Item& item, const NTD& ntd);

RankedList rerank_mmr(const RankedList& candidates, const ItemCatalog& items,
                      const RerankConfig& cfg);
RankedList rerank_pm2(const RankedList& candidates, const ItemCatalog& items,
                      const RerankConfig& cfg);
RankedList rerank_gkl(const RankedList& candidates, const ItemCatalog& items,
                      const RerankConfig& cfg);
// Drops clicked items and multiplies scores by gamma^m, where m counts the
// dimensions whose class has been clicked before. Output keeps the new scores.
RankedList rerank_dap(const RankedList& candidates, const SessionState& state,
                      const ItemCatalog& items, const RerankConfig& cfg);

// Top-N by the candidate order.
RankedList truncate(const RankedList& candidates, std::size_t n);

// Static dispatch; DAP with an empty session is the identity re-rank.
RankedList rerank(const RankedList& candidates, const ItemCatalog& items,
                  const RerankConfig& cfg);

// Weighted sum over dimensions of KL(target || eps-smoothed class distribution).
double ntd_kl(const NTD& ntd, const std::vector<std::vector<double>>& counts,
              double eps = 1e-6);

}  // namespace nrs
