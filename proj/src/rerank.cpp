#include "nrs/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nrs/error.hpp"
#include "nrs/metrics.hpp"

namespace nrs {

namespace {

struct Candidate {
  const ScoredItem* entry;
  const Item* item;
  std::vector<std::size_t> classes;
};

std::vector<Candidate> prepare(const RankedList& candidates, const ItemCatalog& items,
                               const NTD& ntd, std::string_view method) {
  if (candidates.entries.empty()) {
    throw ValidationError(std::string(method) + ": empty candidate list for user '" +
                          candidates.user_id + "'");
  }
  std::vector<Candidate> out;
  out.reserve(candidates.entries.size());
  for (const auto& e : candidates.entries) {
    auto it = items.find(e.id);
    if (it == items.end()) {
      throw ValidationError(std::string(method) + ": unknown item '" + e.id + "'");
    }
    out.push_back({&e, &it->second, classify(it->second, ntd)});
  }
  return out;
}

bool better_relevance(const Candidate& a, const Candidate& b) {
  if (a.entry->score != b.entry->score) return a.entry->score > b.entry->score;
  return a.entry->id < b.entry->id;
}

}  // namespace

std::string_view to_string(RerankMethod m) {
  switch (m) {
    case RerankMethod::None: return "none";
    case RerankMethod::MMR: return "mmr";
    case RerankMethod::PM2: return "pm2";
    case RerankMethod::GKL: return "gkl";
    case RerankMethod::DAP: return "dap";
  }
  return "none";
}

std::optional<RerankMethod> parse_rerank_method(std::string_view s) {
  for (auto m : {RerankMethod::None, RerankMethod::MMR, RerankMethod::PM2, RerankMethod::GKL,
                 RerankMethod::DAP}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void RerankConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValidationError("reranker '" + name + "': lambda must be in [0, 1]");
  }
  if (!(dap_penalty > 0.0 && dap_penalty <= 1.0)) {
    throw ValidationError("reranker '" + name + "': dap_penalty must be in (0, 1]");
  }
  if (list_size == 0) throw ValidationError("reranker '" + name + "': list_size must be >= 1");
  ntd.validate();
}

RerankConfig RerankConfig::from_json(const nlohmann::json& j) {
  RerankConfig c;
  try {
    const auto method = j.at("method").get<std::string>();
    auto m = parse_rerank_method(method);
    if (!m) throw ValidationError("unknown rerank method '" + method + "'");
    c.method = *m;
    c.name = j.value("name", method);
    c.lambda = j.value("lambda", 0.5);
    c.list_size = j.value("list_size", std::size_t{20});
    c.dap_penalty = j.value("dap_penalty", 0.5);
    if (j.contains("ntd")) c.ntd = NTD::from_json(j["ntd"]);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("rerank config: ") + e.what());
  }
  return c;
}

nlohmann::json RerankConfig::to_json() const {
  return {{"name", name},
          {"method", to_string(method)},
          {"lambda", lambda},
          {"list_size", list_size},
          {"dap_penalty", dap_penalty}};
}

std::vector<std::size_t> classify(const Item& item, const NTD& ntd) {
  std::vector<std::size_t> out;
  out.reserve(ntd.dimensions.size());
  for (const auto& t : ntd.dimensions) out.push_back(assign_class(item, t.dimension));
  return out;
}

void SessionState::record_click(const Item& item, const NTD& ntd) {
  const auto classes = classify(item, ntd);
  if (clicked_classes.size() < classes.size()) clicked_classes.resize(classes.size());
  clicked.insert(item.item_id);
  for (std::size_t d = 0; d < classes.size(); ++d) clicked_classes[d].insert(classes[d]);
}

std::vector<double> normalize_scores(const RankedList& list) {
  std::vector<double> out;
  if (list.entries.empty()) return out;
  auto [lo, hi] = std::minmax_element(
      list.entries.begin(), list.entries.end(),
      [](const ScoredItem& a, const ScoredItem& b) { return a.score < b.score; });
  const double min = lo->score;
  const double range = hi->score - min;
  out.reserve(list.entries.size());
  for (const auto& e : list.entries) out.push_back(range > 0.0 ? (e.score - min) / range : 1.0);
  return out;
}

std::vector<double> one_hot_features(const Item& item, const NTD& ntd) {
  std::vector<double> f;
  for (const auto& t : ntd.dimensions) {
    const auto c = assign_class(item, t.dimension);
    for (std::size_t k = 0; k < t.dimension.size(); ++k) f.push_back(k == c ? 1.0 : 0.0);
  }
  return f;
}

RankedList truncate(const RankedList& candidates, std::size_t n) {
  RankedList out{candidates.user_id, candidates.entries};
  if (out.entries.size() > n) out.entries.resize(n);
  return out;
}

RankedList rerank_mmr(const RankedList& candidates, const ItemCatalog& items,
                      const RerankConfig& cfg) {
  const auto cands = prepare(candidates, items, cfg.ntd, "mmr");
  const auto rel = normalize_scores(candidates);
  const std::size_t n = cands.size();
  std::vector<std::vector<double>> features(n);
  for (std::size_t i = 0; i < n; ++i) features[i] = one_hot_features(*cands[i].item, cfg.ntd);

  std::vector<double> max_sim(n, 0.0);
  std::vector<double> sum_sim(n, 0.0);
  std::vector<double> last_sim(n, 0.0);
  std::vector<bool> used(n, false);
  const std::size_t target = std::min(cfg.list_size, n);
  const bool diversity_ties = cfg.lambda < 1.0;

  RankedList out{candidates.user_id, {}};
  for (std::size_t step = 0; step < target; ++step) {
    std::optional<std::size_t> best;
    double best_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double value = cfg.lambda * rel[i] - (1.0 - cfg.lambda) * max_sim[i];
      bool take = !best || value > best_value;
      if (!take && value == best_value) {
        const auto b = *best;
        if (diversity_ties && sum_sim[i] != sum_sim[b]) {
          take = sum_sim[i] < sum_sim[b];
        } else if (diversity_ties && last_sim[i] != last_sim[b]) {
          take = last_sim[i] < last_sim[b];
        } else {
          take = better_relevance(cands[i], cands[b]);
        }
      }
      if (take) {
        best = i;
        best_value = value;
      }
    }
    const auto s = *best;
    used[s] = true;
    out.entries.push_back(*cands[s].entry);
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double sim = cosine_similarity(features[i], features[s]);
      max_sim[i] = std::max(max_sim[i], sim);
      sum_sim[i] += sim;
      last_sim[i] = sim;
    }
  }
  return out;
}

RankedList rerank_pm2(const RankedList& candidates, const ItemCatalog& items,
                      const RerankConfig& cfg) {
  const auto cands = prepare(candidates, items, cfg.ntd, "pm2");
  const auto& dims = cfg.ntd.dimensions;
  const std::size_t dcount = dims.size();

  // Aspects are (dimension, class) pairs laid out dimension by dimension.
  std::vector<std::size_t> offset(dcount + 1, 0);
  for (std::size_t d = 0; d < dcount; ++d) offset[d + 1] = offset[d] + dims[d].dimension.size();
  std::vector<double> votes(offset[dcount]);
  for (std::size_t d = 0; d < dcount; ++d) {
    for (std::size_t c = 0; c < dims[d].dimension.size(); ++c) {
      votes[offset[d] + c] = dims[d].weight * dims[d].proportions[c];
    }
  }
  std::vector<double> seats(votes.size(), 0.0);
  std::vector<std::size_t> supply(votes.size(), 0);
  for (const auto& c : cands) {
    for (std::size_t d = 0; d < dcount; ++d) ++supply[offset[d] + c.classes[d]];
  }

  const std::size_t n = cands.size();
  std::vector<bool> used(n, false);
  const std::size_t target = std::min(cfg.list_size, n);
  const double credit = 1.0 / static_cast<double>(dcount);
  RankedList out{candidates.user_id, {}};
  std::vector<double> qt(votes.size());
  for (std::size_t step = 0; step < target; ++step) {
    std::optional<std::size_t> star;
    for (std::size_t a = 0; a < votes.size(); ++a) {
      qt[a] = votes[a] / (2.0 * seats[a] + 1.0);
      if (supply[a] > 0 && (!star || qt[a] > qt[*star])) star = a;
    }
    std::optional<std::size_t> best;
    double best_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      double in_star = 0.0;
      double others = 0.0;
      for (std::size_t d = 0; d < dcount; ++d) {
        const auto a = offset[d] + cands[i].classes[d];
        if (star && a == *star) {
          in_star = qt[a];
        } else {
          others += qt[a];
        }
      }
      const double value = cfg.lambda * in_star + (1.0 - cfg.lambda) * others;
      if (!best || value > best_value ||
          (value == best_value && better_relevance(cands[i], cands[*best]))) {
        best = i;
        best_value = value;
      }
    }
    const auto s = *best;
    used[s] = true;
    out.entries.push_back(*cands[s].entry);
    for (std::size_t d = 0; d < dcount; ++d) {
      const auto a = offset[d] + cands[s].classes[d];
      seats[a] += credit;
      --supply[a];
    }
  }
  return out;
}

double ntd_kl(const NTD& ntd, const std::vector<std::vector<double>>& counts, double eps) {
  double total = 0.0;
  for (std::size_t d = 0; d < ntd.dimensions.size(); ++d) {
    const auto& t = ntd.dimensions[d];
    double mass = 0.0;
    for (double c : counts[d]) mass += c + eps;
    double kl = 0.0;
    for (std::size_t c = 0; c < t.proportions.size(); ++c) {
      const double p = t.proportions[c];
      if (p <= 0.0) continue;
      const double q = (counts[d][c] + eps) / mass;
      kl += p * std::log(p / q);
    }
    total += t.weight * kl;
  }
  return total;
}

RankedList rerank_gkl(const RankedList& candidates, const ItemCatalog& items,
                      const RerankConfig& cfg) {
  const auto cands = prepare(candidates, items, cfg.ntd, "gkl");
  const auto& dims = cfg.ntd.dimensions;
  std::vector<std::vector<double>> counts(dims.size());
  for (std::size_t d = 0; d < dims.size(); ++d) counts[d].assign(dims[d].dimension.size(), 0.0);

  const std::size_t n = cands.size();
  std::vector<bool> used(n, false);
  const std::size_t target = std::min(cfg.list_size, n);
  RankedList out{candidates.user_id, {}};
  for (std::size_t step = 0; step < target; ++step) {
    std::optional<std::size_t> best;
    double best_kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      for (std::size_t d = 0; d < dims.size(); ++d) counts[d][cands[i].classes[d]] += 1.0;
      const double kl = ntd_kl(cfg.ntd, counts);
      for (std::size_t d = 0; d < dims.size(); ++d) counts[d][cands[i].classes[d]] -= 1.0;
      if (!best || kl < best_kl || (kl == best_kl && better_relevance(cands[i], cands[*best]))) {
        best = i;
        best_kl = kl;
      }
    }
    const auto s = *best;
    used[s] = true;
    out.entries.push_back(*cands[s].entry);
    for (std::size_t d = 0; d < dims.size(); ++d) counts[d][cands[s].classes[d]] += 1.0;
  }
  return out;
}

RankedList rerank_dap(const RankedList& candidates, const SessionState& state,
                      const ItemCatalog& items, const RerankConfig& cfg) {
  RankedList out{candidates.user_id, {}};
  for (const auto& e : candidates.entries) {
    if (state.clicked.contains(e.id)) continue;
    auto it = items.find(e.id);
    if (it == items.end()) throw ValidationError("dap: unknown item '" + e.id + "'");
    int m = 0;
    for (std::size_t d = 0; d < cfg.ntd.dimensions.size() && d < state.clicked_classes.size();
         ++d) {
      auto c = try_assign_class(it->second, cfg.ntd.dimensions[d].dimension);
      if (c && state.clicked_classes[d].contains(*c)) ++m;
    }
    out.entries.push_back({e.id, e.score * std::pow(cfg.dap_penalty, m)});
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
  if (out.entries.size() > cfg.list_size) out.entries.resize(cfg.list_size);
  return out;
}

RankedList rerank(const RankedList& candidates, const ItemCatalog& items,
                  const RerankConfig& cfg) {
  switch (cfg.method) {
    case RerankMethod::MMR: return rerank_mmr(candidates, items, cfg);
    case RerankMethod::PM2: return rerank_pm2(candidates, items, cfg);
    case RerankMethod::GKL: return rerank_gkl(candidates, items, cfg);
    case RerankMethod::DAP: return rerank_dap(candidates, SessionState{}, items, cfg);
    case RerankMethod::None: break;
  }
  return truncate(candidates, cfg.list_size);
}

}  // namespace nrs
