#include "nrs/models.hpp"

#include <algorithm>
#include <array>
#include <exception>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

#include "nrs/error.hpp"
#include "nrs/util.hpp"

namespace nrs {

namespace {

bool by_score_then_id(const ScoredItem& a, const ScoredItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

std::size_t user_row_or_throw(const InteractionMatrix& m, std::string_view user) {
  auto u = m.user_index(user);
  if (!u || m.user_degree(*u) <= 0.0) {
    throw ColdUserError("user '" + std::string(user) + "' has no training interactions");
  }
  return *u;
}

void users_to_items(const InteractionMatrix& m, const std::vector<double>& user_mass,
                    std::vector<double>& item_mass) {
  std::fill(item_mass.begin(), item_mass.end(), 0.0);
  const auto& rp = m.row_ptr();
  const auto& cols = m.user_items();
  const auto& w = m.user_weights();
  for (std::size_t u = 0; u < user_mass.size(); ++u) {
    if (user_mass[u] == 0.0) continue;
    const double scale = user_mass[u] / m.user_degree(u);
    for (std::size_t k = rp[u]; k < rp[u + 1]; ++k) item_mass[cols[k]] += scale * w[k];
  }
}

void items_to_users(const InteractionMatrix& m, const std::vector<double>& item_mass,
                    std::vector<double>& user_mass) {
  std::fill(user_mass.begin(), user_mass.end(), 0.0);
  const auto& cp = m.col_ptr();
  const auto& rows = m.item_users();
  const auto& w = m.item_weights();
  for (std::size_t i = 0; i < item_mass.size(); ++i) {
    if (item_mass[i] == 0.0) continue;
    const double scale = item_mass[i] / m.item_degree(i);
    for (std::size_t k = cp[i]; k < cp[i + 1]; ++k) user_mass[rows[k]] += scale * w[k];
  }
}

void check_hops(std::size_t hops) {
  if (hops < 1 || hops % 2 == 0) {
    throw ValidationError("walk hops must be odd, got " + std::to_string(hops));
  }
}

// Pool items not in the user's history, with their matrix scores; unreachable
// (score 0) items are dropped.
std::vector<ScoredItem> rank_pool(const ModelContext& ctx, const std::set<std::string>& history,
                                  const std::vector<double>& item_scores) {
  std::vector<ScoredItem> out;
  for (const auto& id : ctx.pool) {
    if (history.contains(id)) continue;
    auto i = ctx.matrix->item_index(id);
    if (!i) continue;
    const double s = item_scores[*i];
    if (s > 0.0) out.push_back({id, s});
  }
  std::sort(out.begin(), out.end(), by_score_then_id);
  return out;
}

RankedList top_n(std::string user, std::vector<ScoredItem> ranked, std::size_t n) {
  if (ranked.size() > n) ranked.resize(n);
  return {std::move(user), std::move(ranked)};
}

// Published first = most recent; undated items are oldest.
bool more_recent(const Item* a, const Item* b) {
  const auto ta = a->published_at.value_or(std::numeric_limits<std::int64_t>::min());
  const auto tb = b->published_at.value_or(std::numeric_limits<std::int64_t>::min());
  if (ta != tb) return ta > tb;
  return a->item_id < b->item_id;
}

const TargetDimension& party_target(const ModelConfig& cfg) {
  if (!cfg.ntd) throw ValidationError("model '" + cfg.name + "' requires an NTD");
  const auto* t = cfg.ntd->find(DimensionKind::PartyBucket);
  if (!t) throw ValidationError("model '" + cfg.name + "' requires a party_bucket NTD dimension");
  return *t;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Random: return "random";
    case ModelKind::RP3Beta: return "rp3b";
    case ModelKind::RWE: return "rwe";
    case ModelKind::DRDW: return "drdw";
    case ModelKind::PLD: return "pld";
    case ModelKind::EPD: return "epd";
  }
  return "random";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::Random, ModelKind::RP3Beta, ModelKind::RWE, ModelKind::DRDW,
                 ModelKind::PLD, ModelKind::EPD}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void ModelConfig::validate() const {
  if (hops < 3 || hops % 2 == 0) {
    throw ValidationError("model '" + name + "': hops must be odd and >= 3");
  }
  if (!(beta >= 0.0)) throw ValidationError("model '" + name + "': beta must be >= 0");
  if (list_size == 0) throw ValidationError("model '" + name + "': list_size must be >= 1");
  if (needs_ntd() && !ntd) throw ValidationError("model '" + name + "' requires an NTD");
  if (ntd) ntd->validate();
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    const auto type = j.at("type").get<std::string>();
    auto kind = parse_model_kind(type);
    if (!kind) throw ValidationError("unknown model type '" + type + "'");
    c.kind = *kind;
    c.name = j.value("name", type);
    c.hops = j.value("hops", std::size_t{3});
    c.beta = j.value("beta", 0.7);
    c.list_size = j.value("list_size", std::size_t{20});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("ntd")) c.ntd = NTD::from_json(j["ntd"]);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model config: ") + e.what());
  }
  return c;
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j{{"name", name},   {"type", to_string(kind)}, {"hops", hops},
                   {"beta", beta},   {"list_size", list_size},  {"seed", seed}};
  if (ntd) j["ntd"] = ntd->to_json();
  return j;
}

std::vector<std::string> RankedList::ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.id);
  return out;
}

std::set<std::string> ModelContext::history(std::string_view user) const {
  std::set<std::string> out;
  if (!matrix) return out;
  if (auto u = matrix->user_index(user)) {
    for (const auto& e : matrix->user_row(*u)) out.insert(matrix->items()[e.index]);
  }
  return out;
}

std::vector<double> walk_scores(const InteractionMatrix& matrix, std::string_view user,
                                std::size_t hops) {
  check_hops(hops);
  const auto u = user_row_or_throw(matrix, user);
  std::vector<double> users(matrix.user_count(), 0.0);
  std::vector<double> items(matrix.item_count(), 0.0);
  users[u] = 1.0;
  for (std::size_t h = 1; h <= hops; ++h) {
    if (h % 2 == 1) {
      users_to_items(matrix, users, items);
    } else {
      items_to_users(matrix, items, users);
    }
  }
  return items;
}

std::optional<std::vector<double>> erased_walk_scores(const InteractionMatrix& matrix,
                                                      std::string_view user, std::size_t hops) {
  check_hops(hops);
  const auto u = user_row_or_throw(matrix, user);
  std::vector<std::uint32_t> own;
  for (const auto& e : matrix.user_row(u)) own.push_back(e.index);

  std::vector<double> users(matrix.user_count(), 0.0);
  std::vector<double> items(matrix.item_count(), 0.0);
  users[u] = 1.0;
  for (std::size_t h = 1; h <= hops; ++h) {
    if (h % 2 == 0) {
      items_to_users(matrix, items, users);
      continue;
    }
    users_to_items(matrix, users, items);
    if (h == 1) continue;
    for (auto i : own) items[i] = 0.0;
    const double mass = std::accumulate(items.begin(), items.end(), 0.0);
    if (mass <= 0.0) return std::nullopt;
    for (auto& v : items) v /= mass;
  }
  return items;
}

double random_score(std::uint64_t seed, std::string_view user, std::string_view item) {
  std::mt19937_64 rng(user_seed(seed, user) ^ (fnv1a(item) * 0x9E3779B97F4A7C15ULL));
  return std::generate_canonical<double, 53>(rng);
}

RankedList recommend_random(const ModelContext& ctx, const std::string& user,
                            const ModelConfig& cfg) {
  const auto history = ctx.history(user);
  std::vector<ScoredItem> ranked;
  for (const auto& id : ctx.pool) {
    if (!history.contains(id)) ranked.push_back({id, random_score(cfg.seed, user, id)});
  }
  std::sort(ranked.begin(), ranked.end(), by_score_then_id);
  return top_n(user, std::move(ranked), cfg.list_size);
}

RankedList recommend_rp3b(const ModelContext& ctx, const std::string& user,
                          const ModelConfig& cfg) {
  auto scores = walk_scores(*ctx.matrix, user, cfg.hops);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > 0.0 && cfg.beta != 0.0) {
      scores[i] *= std::pow(ctx.matrix->item_degree(i), -cfg.beta);
    }
  }
  return top_n(user, rank_pool(ctx, ctx.history(user), scores), cfg.list_size);
}

RankedList recommend_rwe(const ModelContext& ctx, const std::string& user,
                         const ModelConfig& cfg, bool* fell_back) {
  auto scores = erased_walk_scores(*ctx.matrix, user, cfg.hops);
  if (fell_back) *fell_back = !scores.has_value();
  if (!scores) return recommend_random(ctx, user, cfg);
  return top_n(user, rank_pool(ctx, ctx.history(user), *scores), cfg.list_size);
}

DrdwResult recommend_drdw(const ModelContext& ctx, const std::string& user,
                          const ModelConfig& cfg) {
  if (!cfg.ntd) throw ValidationError("drdw requires an NTD");
  const NTD& ntd = *cfg.ntd;
  const std::size_t dims = ntd.dimensions.size();
  const auto history = ctx.history(user);

  struct Candidate {
    ScoredItem item;
    std::vector<std::size_t> classes;
  };
  std::vector<Candidate> classifiable;
  for (const auto& id : ctx.pool) {
    if (history.contains(id)) continue;
    auto it = ctx.items->find(id);
    if (it == ctx.items->end()) continue;
    Candidate c{{id, 0.0}, {}};
    bool ok = true;
    for (const auto& t : ntd.dimensions) {
      auto cls = try_assign_class(it->second, t.dimension);
      if (!cls) {
        ok = false;
        break;
      }
      c.classes.push_back(*cls);
    }
    if (ok) classifiable.push_back(std::move(c));
  }
  if (classifiable.empty()) {
    throw ValidationError("drdw: no classifiable pool items for user '" + user + "'");
  }

  const auto scores = walk_scores(*ctx.matrix, user, cfg.hops);
  std::vector<Candidate> reachable;
  for (auto& c : classifiable) {
    auto i = ctx.matrix->item_index(c.item.id);
    if (!i || scores[*i] <= 0.0) continue;
    c.item.score = scores[*i];
    reachable.push_back(std::move(c));
  }
  std::sort(reachable.begin(), reachable.end(),
            [](const Candidate& a, const Candidate& b) { return by_score_then_id(a.item, b.item); });

  const auto plan = quotas(ntd, cfg.list_size);
  std::vector<std::vector<long>> counts(dims);
  for (std::size_t d = 0; d < dims; ++d) counts[d].assign(plan.per_dimension[d].size(), 0);

  std::vector<bool> used(reachable.size(), false);
  std::vector<ScoredItem> chosen;
  auto admit = [&](std::size_t k) {
    used[k] = true;
    for (std::size_t d = 0; d < dims; ++d) ++counts[d][reachable[k].classes[d]];
    chosen.push_back(reachable[k].item);
  };

  for (std::size_t k = 0; k < reachable.size() && chosen.size() < cfg.list_size; ++k) {
    bool fits = true;
    for (std::size_t d = 0; d < dims && fits; ++d) {
      const auto c = reachable[k].classes[d];
      fits = counts[d][c] < static_cast<long>(plan.per_dimension[d][c]);
    }
    if (fits) admit(k);
  }

  // Quotas cannot all be met: fill by the smallest increase in total absolute
  // quota deviation, preferring the largest deficit, then score order.
  while (chosen.size() < cfg.list_size) {
    std::optional<std::size_t> best;
    long best_delta = 0;
    long best_deficit = 0;
    for (std::size_t k = 0; k < reachable.size(); ++k) {
      if (used[k]) continue;
      long delta = 0;
      long deficit = 0;
      for (std::size_t d = 0; d < dims; ++d) {
        const auto c = reachable[k].classes[d];
        const long gap = static_cast<long>(plan.per_dimension[d][c]) - counts[d][c];
        delta += gap > 0 ? -1 : 1;
        deficit += std::max(gap, 0L);
      }
      if (!best || delta < best_delta || (delta == best_delta && deficit > best_deficit)) {
        best = k;
        best_delta = delta;
        best_deficit = deficit;
      }
    }
    if (!best) break;
    admit(*best);
  }

  DrdwResult result;
  result.list = {user, std::move(chosen)};
  for (std::size_t d = 0; d < dims; ++d) {
    const auto& dim = ntd.dimensions[d].dimension;
    for (std::size_t c = 0; c < dim.size(); ++c) {
      const auto q = static_cast<long>(plan.per_dimension[d][c]);
      if (counts[d][c] != q) {
        result.deviations.push_back({dim.name, dim.classes[c].label, q, counts[d][c]});
      }
    }
  }
  return result;
}

RankedList pld_shared_list(const ModelContext& ctx, const ModelConfig& cfg) {
  std::map<std::int64_t, std::size_t> cluster_size;
  std::map<std::int64_t, const Item*> newest_political;
  for (const auto& id : ctx.pool) {
    auto it = ctx.items->find(id);
    if (it == ctx.items->end() || !it->second.story_cluster) continue;
    const Item* item = &it->second;
    const auto cluster = *item->story_cluster;
    ++cluster_size[cluster];
    if (item->party_label == PartyLabel::None) continue;
    auto& slot = newest_political[cluster];
    if (!slot || more_recent(item, slot)) slot = item;
  }
  if (newest_political.empty()) {
    throw ValidationError("pld: no story cluster in the pool contains political items");
  }
  std::vector<std::int64_t> order;
  for (const auto& [cluster, item] : newest_political) order.push_back(cluster);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return cluster_size[a] > cluster_size[b];
  });
  RankedList list;
  const std::size_t n = std::min(cfg.list_size, order.size());
  for (std::size_t r = 0; r < n; ++r) {
    list.entries.push_back({newest_political[order[r]]->item_id,
                            1.0 - static_cast<double>(r) / static_cast<double>(cfg.list_size)});
  }
  return list;
}

std::map<std::string, RankedList> recommend_pld(const ModelContext& ctx,
                                                std::span<const std::string> users,
                                                const ModelConfig& cfg) {
  const auto shared = pld_shared_list(ctx, cfg);
  std::map<std::string, RankedList> out;
  for (const auto& u : users) {
    auto list = shared;
    list.user_id = u;
    out.emplace(u, std::move(list));
  }
  return out;
}

EpdResult recommend_epd(const ModelContext& ctx, const std::string& user,
                        const ModelConfig& cfg) {
  const auto& target = party_target(cfg);
  const auto plan = apportion(target.proportions, cfg.list_size);
  std::size_t political_quota = 0;
  for (std::size_t c = 0; c < target.dimension.size(); ++c) {
    if (target.dimension.classes[c].party != PartyLabel::None) political_quota += plan[c];
  }

  const auto history = ctx.history(user);
  std::array<std::vector<const Item*>, kPartyLabelCount> buckets;
  for (const auto& id : ctx.pool) {
    if (history.contains(id)) continue;
    auto it = ctx.items->find(id);
    if (it == ctx.items->end()) continue;
    buckets[static_cast<std::size_t>(it->second.party_label)].push_back(&it->second);
  }
  for (auto& b : buckets) std::sort(b.begin(), b.end(), more_recent);

  EpdResult result;
  constexpr std::array kPolitical = {PartyLabel::Governing, PartyLabel::Opposition,
                                     PartyLabel::Both, PartyLabel::Other};
  for (auto label : kPolitical) {
    if (buckets[static_cast<std::size_t>(label)].empty()) {
      result.warnings.push_back("epd: no pool items in bucket '" + std::string(to_string(label)) +
                                "' for user '" + user + "'");
    }
  }
  std::array<std::size_t, kPartyLabelCount> next{};
  std::vector<const Item*> chosen;
  auto round_robin = [&](std::size_t limit) {
    bool progressed = true;
    while (chosen.size() < limit && progressed) {
      progressed = false;
      for (auto label : kPolitical) {
        if (chosen.size() >= limit) break;
        const auto b = static_cast<std::size_t>(label);
        if (next[b] < buckets[b].size()) {
          chosen.push_back(buckets[b][next[b]++]);
          progressed = true;
        }
      }
    }
  };
  round_robin(std::min(political_quota, cfg.list_size));
  const auto none = static_cast<std::size_t>(PartyLabel::None);
  while (chosen.size() < cfg.list_size && next[none] < buckets[none].size()) {
    chosen.push_back(buckets[none][next[none]++]);
  }
  round_robin(cfg.list_size);

  result.list.user_id = user;
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    result.list.entries.push_back(
        {chosen[r]->item_id, 1.0 - static_cast<double>(r) / static_cast<double>(cfg.list_size)});
  }
  return result;
}

ModelOutput recommend(const ModelContext& ctx, const std::string& user, const ModelConfig& cfg) {
  ModelOutput out;
  try {
    switch (cfg.kind) {
      case ModelKind::Random: out.list = recommend_random(ctx, user, cfg); break;
      case ModelKind::RP3Beta: out.list = recommend_rp3b(ctx, user, cfg); break;
      case ModelKind::RWE: {
        bool fell_back = false;
        out.list = recommend_rwe(ctx, user, cfg, &fell_back);
        if (fell_back) {
          out.warnings.push_back("rwe: all walk mass erased for user '" + user +
                                 "', using random fallback");
        }
        break;
      }
      case ModelKind::DRDW: {
        auto r = recommend_drdw(ctx, user, cfg);
        out.list = std::move(r.list);
        for (const auto& d : r.deviations) {
          out.warnings.push_back("drdw: user '" + user + "' " + d.dimension + "/" +
                                 d.class_label + " count " + std::to_string(d.count) +
                                 " != quota " + std::to_string(d.quota));
        }
        break;
      }
      case ModelKind::PLD:
        out.list = pld_shared_list(ctx, cfg);
        out.list.user_id = user;
        break;
      case ModelKind::EPD: {
        auto r = recommend_epd(ctx, user, cfg);
        out.list = std::move(r.list);
        out.warnings = std::move(r.warnings);
        break;
      }
    }
  } catch (const ColdUserError&) {
    out.warnings.push_back(std::string(to_string(cfg.kind)) + ": cold user '" + user +
                           "', using random fallback");
    out.list = recommend_random(ctx, user, cfg);
  }
  if (out.list.entries.size() < cfg.list_size) {
    out.warnings.push_back(std::string(to_string(cfg.kind)) + ": user '" + user + "' got " +
                           std::to_string(out.list.entries.size()) + " of " +
                           std::to_string(cfg.list_size) + " items");
  }
  return out;
}

std::vector<ModelOutput> recommend_batch(const ModelContext& ctx,
                                         std::span<const std::string> users,
                                         const ModelConfig& cfg) {
  std::vector<ModelOutput> out(users.size());
  const auto n = static_cast<std::ptrdiff_t>(users.size());
  // Exceptions must not escape an OpenMP region; collect the first one.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      out[static_cast<std::size_t>(k)] = recommend(ctx, users[static_cast<std::size_t>(k)], cfg);
    } catch (...) {
#pragma omp critical(nrs_recommend_batch_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<ModelOutput> recommend_batch_serial(const ModelContext& ctx,
                                                std::span<const std::string> users,
                                                const ModelConfig& cfg) {
  std::vector<ModelOutput> out;
  out.reserve(users.size());
  for (const auto& u : users) out.push_back(recommend(ctx, u, cfg));
  return out;
}

UserScores score_items(const ModelContext& ctx, const std::string& user, const ModelConfig& cfg,
                       std::span<const std::string> items) {
  UserScores out;
  auto from_vector = [&](const std::vector<double>& scores, double beta) {
    for (const auto& id : items) {
      double s = 0.0;
      if (auto i = ctx.matrix->item_index(id)) {
        s = scores[*i];
        if (s > 0.0 && beta != 0.0) s *= std::pow(ctx.matrix->item_degree(*i), -beta);
      }
      out[id] = s;
    }
  };
  auto random_fallback = [&] {
    for (const auto& id : items) out[id] = random_score(cfg.seed, user, id);
  };
  try {
    switch (cfg.kind) {
      case ModelKind::Random: random_fallback(); break;
      case ModelKind::RP3Beta: from_vector(walk_scores(*ctx.matrix, user, cfg.hops), cfg.beta); break;
      case ModelKind::DRDW: from_vector(walk_scores(*ctx.matrix, user, cfg.hops), 0.0); break;
      case ModelKind::RWE: {
        auto s = erased_walk_scores(*ctx.matrix, user, cfg.hops);
        if (s) {
          from_vector(*s, 0.0);
        } else {
          random_fallback();
        }
        break;
      }
      case ModelKind::PLD:
      case ModelKind::EPD: {
        const auto list = recommend(ctx, user, cfg).list;
        std::map<std::string, double, std::less<>> by_id;
        for (const auto& e : list.entries) by_id[e.id] = e.score;
        for (const auto& id : items) {
          auto it = by_id.find(id);
          out[id] = it == by_id.end() ? 0.0 : it->second;
        }
        break;
      }
    }
  } catch (const ColdUserError&) {
    random_fallback();
  }
  return out;
}

}  // namespace nrs
