#include "nrs/simulate.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "nrs/error.hpp"
#include "nrs/util.hpp"

namespace nrs {

namespace {

nlohmann::ordered_json list_json(const RankedList& list) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : list.entries) {
    arr.push_back(nlohmann::ordered_json{{"id", e.id}, {"score", e.score}});
  }
  return arr;
}

double boost(const Item& item, const UserProfile& profile, const BehaviorConfig& b,
             const Dimension& sentiment) {
  switch (b.mode) {
    case BehaviorMode::POS: return 1.0;
    case BehaviorMode::Category:
      return profile.categories.contains(item.category) ? b.category_boost : 1.0;
    case BehaviorMode::ATT: {
      double w = profile.parties.contains(item.party_label) ? b.attribute_boost : 1.0;
      auto bin = try_assign_class(item, sentiment);
      if (bin && profile.sentiment_bins.contains(*bin)) w *= b.attribute_boost;
      return w;
    }
  }
  return 1.0;
}

}  // namespace

std::string_view to_string(BehaviorMode m) {
  switch (m) {
    case BehaviorMode::POS: return "pos";
    case BehaviorMode::ATT: return "att";
    case BehaviorMode::Category: return "category";
  }
  return "pos";
}

std::optional<BehaviorMode> parse_behavior_mode(std::string_view s) {
  for (auto m : {BehaviorMode::POS, BehaviorMode::ATT, BehaviorMode::Category}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void BehaviorConfig::validate() const {
  if (!(position_decay > 0.0 && position_decay <= 1.0)) {
    throw ValidationError("behavior: position_decay must be in (0, 1]");
  }
  if (!(category_boost >= 1.0)) throw ValidationError("behavior: category_boost must be >= 1");
  if (!(attribute_boost >= 1.0)) throw ValidationError("behavior: attribute_boost must be >= 1");
  if (loops < 1) throw ValidationError("behavior: loops must be >= 1");
}

BehaviorConfig BehaviorConfig::from_json(const nlohmann::json& j) {
  BehaviorConfig b;
  try {
    const auto mode = j.value("mode", std::string("pos"));
    auto m = parse_behavior_mode(mode);
    if (!m) throw ValidationError("unknown behavior mode '" + mode + "'");
    b.mode = *m;
    b.position_decay = j.value("position_decay", 0.85);
    b.category_boost = j.value("category_boost", 3.0);
    b.attribute_boost = j.value("attribute_boost", 3.0);
    b.clicks_per_session = j.value("clicks_per_session", std::size_t{2});
    b.loops = j.value("loops", std::size_t{5});
    b.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("behavior config: ") + e.what());
  }
  return b;
}

nlohmann::json BehaviorConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"position_decay", position_decay},
          {"category_boost", category_boost},
          {"attribute_boost", attribute_boost},
          {"clicks_per_session", clicks_per_session},
          {"loops", loops},
          {"seed", seed}};
}

UserProfile build_profile(const std::vector<std::string>& history, const ItemCatalog& items) {
  UserProfile p;
  const auto bins = default_sentiment_bins();
  for (const auto& id : history) {
    auto it = items.find(id);
    if (it == items.end()) continue;
    p.categories.insert(it->second.category);
    p.parties.insert(it->second.party_label);
    if (auto bin = try_assign_class(it->second, bins)) p.sentiment_bins.insert(*bin);
  }
  return p;
}

std::vector<double> click_probabilities(const RankedList& list, const ItemCatalog& items,
                                        const UserProfile& profile, const BehaviorConfig& b) {
  if (list.entries.empty()) throw ValidationError("click_probabilities: empty list");
  const auto bins = default_sentiment_bins();
  std::vector<double> w;
  w.reserve(list.entries.size());
  double position = 1.0;
  for (const auto& e : list.entries) {
    auto it = items.find(e.id);
    if (it == items.end()) throw ValidationError("click_probabilities: unknown item '" + e.id + "'");
    w.push_back(position * boost(it->second, profile, b, bins));
    position *= b.position_decay;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

std::vector<std::size_t> sample_without_replacement(std::vector<double> weights, std::size_t k,
                                                    std::uint64_t& state) {
  std::mt19937_64 rng(state);
  std::vector<std::size_t> out;
  k = std::min(k, weights.size());
  for (std::size_t draw = 0; draw < k; ++draw) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) break;
    const double u = std::generate_canonical<double, 53>(rng) * total;
    double acc = 0.0;
    std::size_t pick = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      pick = i;
      if (u < acc) break;
    }
    out.push_back(pick);
    weights[pick] = 0.0;
  }
  state = rng();
  return out;
}

SimLog run_simulation(const RankedList& candidates, const ItemCatalog& items,
                      const UserProfile& profile, const RerankConfig& dap,
                      const BehaviorConfig& b) {
  SimLog log;
  log.user_id = candidates.user_id;
  std::uint64_t state = user_seed(b.seed, candidates.user_id);
  SessionState session;
  session.user_id = candidates.user_id;
  session.clicked_classes.resize(dap.ntd.dimensions.size());

  RankedList current = rerank_dap(candidates, session, items, dap);
  for (std::size_t loop = 0; loop < b.loops; ++loop) {
    if (current.entries.size() < dap.list_size) {
      log.ended_early = true;
      break;
    }
    SimLoop l;
    l.loop = loop;
    l.shown = current;
    const auto probs = click_probabilities(l.shown, items, profile, b);
    for (auto idx : sample_without_replacement(probs, b.clicks_per_session, state)) {
      const auto& id = l.shown.entries[idx].id;
      l.clicked.push_back(id);
      session.record_click(items.find(id)->second, dap.ntd);
    }
    session.session_index = loop + 1;
    l.post = rerank_dap(candidates, session, items, dap);
    current = l.post;
    log.loops.push_back(std::move(l));
  }
  return log;
}

std::string SimLog::to_jsonl() const {
  std::string out;
  for (const auto& l : loops) {
    nlohmann::ordered_json j{{"user_id", user_id},
                             {"loop", l.loop},
                             {"shown", list_json(l.shown)},
                             {"clicked", l.clicked},
                             {"post", list_json(l.post)}};
    out += j.dump();
    out += '\n';
  }
  if (ended_early) {
    nlohmann::ordered_json j{{"user_id", user_id}, {"loop", loops.size()}, {"ended_early", true}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace nrs
