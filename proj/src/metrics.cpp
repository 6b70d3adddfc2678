#include "nrs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "nrs/error.hpp"
#include "nrs/util.hpp"

namespace nrs {

Distribution distribution_from_counts(std::span<const double> counts) {
  Distribution d;
  d.mass.assign(counts.begin(), counts.end());
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) {
    std::fill(d.mass.begin(), d.mass.end(), 0.0);
    d.empty = true;
    return d;
  }
  for (auto& m : d.mass) m /= total;
  return d;
}

Distribution build_distribution(std::span<const Item* const> items, const Dimension& dim) {
  std::vector<double> counts(dim.size(), 0.0);
  for (const Item* item : items) {
    if (auto c = try_assign_class(*item, dim)) counts[*c] += 1.0;
  }
  return distribution_from_counts(counts);
}

double jsd(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw ValidationError("jsd: distributions have different class sets");
  }
  if (p.empty || q.empty) throw ValidationError("jsd: empty distribution");
  double div = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = 0.5 * (p.mass[k] + q.mass[k]);
    if (p.mass[k] > 0.0) div += 0.5 * p.mass[k] * std::log2(p.mass[k] / m);
    if (q.mass[k] > 0.0) div += 0.5 * q.mass[k] * std::log2(q.mass[k] / m);
  }
  return std::clamp(div, 0.0, 1.0);
}

double gini(const Distribution& p) {
  const std::size_t n = p.size();
  if (n < 2 || p.empty) return 0.0;
  std::vector<double> sorted = p.mass;
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    acc += (2.0 * static_cast<double>(i) - static_cast<double>(n) - 1.0) * sorted[i - 1];
  }
  return acc / static_cast<double>(n - 1);
}

std::optional<double> ild_from_counts(std::span<const std::size_t> counts) {
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (n < 2) return std::nullopt;
  double same = 0.0;
  for (auto c : counts) same += static_cast<double>(c) * static_cast<double>(c - (c > 0)) / 2.0;
  const double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - same / total;
}

std::optional<double> ild(std::span<const std::size_t> classes) {
  if (classes.size() < 2) return std::nullopt;
  const std::size_t k = *std::max_element(classes.begin(), classes.end()) + 1;
  std::vector<std::size_t> counts(k, 0);
  for (auto c : classes) ++counts[c];
  return ild_from_counts(counts);
}

namespace {

std::vector<std::size_t> classes_of(std::span<const Item* const> items, const Dimension& dim) {
  std::vector<std::size_t> out;
  out.reserve(items.size());
  for (const Item* item : items) {
    if (auto c = try_assign_class(*item, dim)) out.push_back(*c);
  }
  return out;
}

}  // namespace

std::optional<double> ild(std::span<const Item* const> items, const Dimension& dim) {
  return ild(classes_of(items, dim));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::optional<double> ild_vectors(const std::vector<std::vector<double>>& features) {
  const std::size_t n = features.size();
  if (n < 2) return std::nullopt;
  double acc = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      acc += 1.0 - cosine_similarity(features[a], features[b]);
    }
  }
  return acc / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

std::optional<double> eild(std::span<const std::size_t> classes) {
  const std::size_t n = classes.size();
  if (n < 2) return std::nullopt;
  std::vector<double> disc(n);
  for (std::size_t r = 0; r < n; ++r) disc[r] = 1.0 / std::log2(static_cast<double>(r) + 2.0);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      if (k == l) continue;
      const double w = disc[k] * disc[l];
      den += w;
      if (classes[k] != classes[l]) num += w;
    }
  }
  return num / den;
}

std::optional<double> eild(std::span<const Item* const> items, const Dimension& dim) {
  return eild(classes_of(items, dim));
}

namespace {

int relevance_of(const Relevance& rel, const std::string& id) {
  auto it = rel.find(id);
  return it == rel.end() ? 0 : it->second;
}

const std::vector<std::string>* aspects_of(const AspectMap& aspects, const std::string& id) {
  auto it = aspects.find(id);
  return it == aspects.end() ? nullptr : &it->second;
}

double gain(const std::string& id, const Relevance& relevance, const AspectMap& aspects,
            const std::map<std::string, int>& seen, double alpha) {
  const int rel = relevance_of(relevance, id);
  const auto* as = aspects_of(aspects, id);
  if (rel <= 0 || !as) return 0.0;
  double g = 0.0;
  for (const auto& a : *as) {
    auto it = seen.find(a);
    const int count = it == seen.end() ? 0 : it->second;
    g += rel * std::pow(1.0 - alpha, count);
  }
  return g;
}

void mark_seen(const std::string& id, const Relevance& relevance, const AspectMap& aspects,
               std::map<std::string, int>& seen) {
  if (relevance_of(relevance, id) <= 0) return;
  if (const auto* as = aspects_of(aspects, id)) {
    for (const auto& a : *as) ++seen[a];
  }
}

}  // namespace

double alpha_dcg(std::span<const std::string> ranking, const Relevance& relevance,
                 const AspectMap& aspects, double alpha) {
  std::map<std::string, int> seen;
  double dcg = 0.0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    dcg += gain(ranking[k], relevance, aspects, seen, alpha) /
           std::log2(static_cast<double>(k) + 2.0);
    mark_seen(ranking[k], relevance, aspects, seen);
  }
  return dcg;
}

double alpha_ndcg(std::span<const std::string> ranking, const Relevance& relevance,
                  const AspectMap& aspects, double alpha) {
  std::vector<std::string> remaining;
  for (const auto& [id, rel] : relevance) {
    if (rel > 0) remaining.push_back(id);
  }
  std::vector<std::string> ideal;
  std::map<std::string, int> seen;
  while (ideal.size() < ranking.size() && !remaining.empty()) {
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      const double g = gain(remaining[k], relevance, aspects, seen, alpha);
      if (g > best_gain) {
        best_gain = g;
        best = k;
      }
    }
    mark_seen(remaining[best], relevance, aspects, seen);
    ideal.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  const double idcg = alpha_dcg(ideal, relevance, aspects, alpha);
  if (idcg <= 0.0) return 0.0;
  return std::min(1.0, alpha_dcg(ranking, relevance, aspects, alpha) / idcg);
}

std::map<std::string, double> genre_probabilities(
    std::span<const std::vector<std::string>> pool_genres) {
  std::map<std::string, double> p;
  if (pool_genres.empty()) return p;
  for (const auto& genres : pool_genres) {
    std::set<std::string> unique(genres.begin(), genres.end());
    for (const auto& g : unique) p[g] += 1.0;
  }
  for (auto& [g, v] : p) v /= static_cast<double>(pool_genres.size());
  return p;
}

namespace {

double binomial_pmf(std::size_t n, std::size_t k, double p) {
  if (k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double log_choose = std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1);
  return std::exp(log_choose + kd * std::log(p) + (nd - kd) * std::log1p(-p));
}

}  // namespace

double binomial_diversity(std::span<const std::vector<std::string>> list_genres,
                          const std::map<std::string, double>& genre_probability) {
  if (genre_probability.empty()) {
    throw ValidationError("binomial diversity: empty genre universe");
  }
  const std::size_t n = list_genres.size();
  const double inv_g = 1.0 / static_cast<double>(genre_probability.size());
  std::map<std::string, std::size_t> occurrences;
  for (const auto& genres : list_genres) {
    std::set<std::string> unique(genres.begin(), genres.end());
    for (const auto& g : unique) ++occurrences[g];
  }
  double coverage = 1.0;
  double non_redundancy = 1.0;
  for (const auto& [g, p] : genre_probability) {
    auto it = occurrences.find(g);
    if (it == occurrences.end()) {
      coverage *= std::pow(binomial_pmf(n, 0, p), inv_g);
      continue;
    }
    const double p_zero = binomial_pmf(n, 0, p);
    if (p_zero >= 1.0) continue;
    double below = 0.0;
    for (std::size_t l = 1; l < it->second; ++l) below += binomial_pmf(n, l, p);
    const double cond = std::clamp(below / (1.0 - p_zero), 0.0, 1.0);
    non_redundancy *= std::pow(1.0 - cond, inv_g);
  }
  return coverage * non_redundancy;
}

std::optional<double> impression_auc(const UserScores& scores, const Impression& imp,
                                     std::size_t* missing) {
  std::vector<double> pos, neg;
  for (const auto& e : imp.shown) {
    auto it = scores.find(e.item_id);
    double s = -std::numeric_limits<double>::infinity();
    if (it != scores.end()) {
      s = it->second;
    } else if (missing) {
      ++*missing;
    }
    (e.clicked ? pos : neg).push_back(s);
  }
  if (pos.empty() || neg.empty()) return std::nullopt;
  double wins = 0.0;
  for (double a : pos) {
    for (double b : neg) {
      if (a > b) {
        wins += 1.0;
      } else if (a == b) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

AucResult auc(const Predictions& predictions, std::span<const Impression> impressions) {
  AucResult result;
  static const UserScores kNone;
  std::map<std::string, std::pair<double, std::size_t>> per_user;
  for (const auto& imp : impressions) {
    auto it = predictions.find(imp.user_id);
    const UserScores& scores = it == predictions.end() ? kNone : it->second;
    auto v = impression_auc(scores, imp, &result.missing_scores);
    if (!v) {
      ++result.impressions_skipped;
      continue;
    }
    ++result.impressions_used;
    auto& acc = per_user[imp.user_id];
    acc.first += *v;
    ++acc.second;
  }
  double total = 0.0;
  for (const auto& [user, acc] : per_user) total += acc.first / static_cast<double>(acc.second);
  result.users = per_user.size();
  if (result.users > 0) result.auc = total / static_cast<double>(result.users);
  return result;
}

Distribution alt_voices_distribution(std::span<const Item* const> items) {
  std::vector<double> counts(2, 0.0);
  for (const Item* item : items) {
    switch (item->party_label) {
      case PartyLabel::Other: counts[0] += 1.0; break;
      case PartyLabel::Governing:
      case PartyLabel::Opposition:
      case PartyLabel::Both: counts[1] += 1.0; break;
      case PartyLabel::None: break;
    }
  }
  return distribution_from_counts(counts);
}

EvalContext EvalContext::build(const Corpus& corpus, std::vector<std::string> pool,
                               const NTD& ntd) {
  EvalContext ctx;
  ctx.items = &corpus.items;
  ctx.histories = &corpus.histories;
  ctx.pool = std::move(pool);

  std::set<std::string> categories;
  std::set<std::int64_t> clusters;
  for (const auto& [id, item] : corpus.items) {
    if (!item.category.empty()) categories.insert(item.category);
    if (item.story_cluster) clusters.insert(*item.story_cluster);
    ctx.aspects[id] = {item.category};
  }
  ctx.category = Dimension::categories("category", {categories.begin(), categories.end()});
  ctx.clusters = Dimension::story_clusters("story_cluster", {clusters.begin(), clusters.end()});
  const auto* sent = ntd.find(DimensionKind::SentimentBin);
  ctx.sentiment = sent ? sent->dimension : default_sentiment_bins();
  const auto* party = ntd.find(DimensionKind::PartyBucket);
  ctx.party = party ? party->dimension : Dimension::party_buckets();
  ctx.activation = activation_bins();
  ctx.complexity = complexity_bins();

  std::vector<const Item*> pool_items;
  std::vector<std::vector<std::string>> pool_genres;
  for (const auto& id : ctx.pool) {
    auto it = corpus.items.find(id);
    if (it == corpus.items.end()) continue;
    pool_items.push_back(&it->second);
    pool_genres.push_back({it->second.category});
  }
  ctx.pool_activation = build_distribution(pool_items, ctx.activation);
  ctx.pool_party = build_distribution(pool_items, ctx.party);
  ctx.pool_alt_voices = alt_voices_distribution(pool_items);
  ctx.genre_probability = genre_probabilities(pool_genres);

  for (const auto& imp : corpus.impressions) {
    for (const auto& e : imp.shown) {
      if (e.clicked) ctx.clicked[imp.user_id][e.item_id] = 1;
    }
  }
  return ctx;
}

namespace {

std::vector<const Item*> resolve_items(const ItemCatalog& catalog,
                                       std::span<const std::string> ids) {
  std::vector<const Item*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = catalog.find(id);
    if (it != catalog.end()) out.push_back(&it->second);
  }
  return out;
}

std::optional<double> safe_jsd(const Distribution& p, const Distribution& q) {
  if (p.empty || q.empty || p.size() != q.size()) return std::nullopt;
  return jsd(p, q);
}

std::vector<const Item*> history_items(const EvalContext& ctx, const std::string& user) {
  std::vector<const Item*> out;
  auto it = ctx.histories->find(user);
  if (it == ctx.histories->end()) return out;
  for (const auto& e : it->second) {
    auto item = ctx.items->find(e.item_id);
    if (item != ctx.items->end()) out.push_back(&item->second);
  }
  return out;
}

}  // namespace

UserMetrics radio_user(const EvalContext& ctx, const std::string& user,
                       std::span<const std::string> recs, const Recommendations& all,
                       std::span<const std::string> others, const EvalOptions& opts) {
  UserMetrics m;
  const auto rec_items = resolve_items(*ctx.items, recs);
  const auto hist = history_items(ctx, user);

  m.activation = safe_jsd(build_distribution(rec_items, ctx.activation), ctx.pool_activation);
  m.representation = safe_jsd(build_distribution(rec_items, ctx.party), ctx.pool_party);
  m.alt_voices = safe_jsd(alt_voices_distribution(rec_items), ctx.pool_alt_voices);
  if (!hist.empty()) {
    m.cat_calibration = safe_jsd(build_distribution(rec_items, ctx.category),
                                 build_distribution(hist, ctx.category));
    m.comp_calibration = safe_jsd(build_distribution(rec_items, ctx.complexity),
                                  build_distribution(hist, ctx.complexity));
  }

  // Fragmentation: sample without replacement from the other users, seeded per
  // user so the result does not depend on evaluation order.
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < others.size(); ++k) {
    if (others[k] != user) candidates.push_back(k);
  }
  std::mt19937_64 rng(user_seed(opts.seed, user));
  const std::size_t take = std::min(opts.fragmentation_sample, candidates.size());
  for (std::size_t k = 0; k < take; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, candidates.size() - 1);
    std::swap(candidates[k], candidates[pick(rng)]);
  }
  const Distribution own =
      opts.fragmentation_mode == FragmentationMode::RecsVsRecs
          ? build_distribution(rec_items, ctx.clusters)
          : build_distribution(hist, ctx.clusters);
  double frag = 0.0;
  std::size_t pairs = 0;
  for (std::size_t k = 0; k < take; ++k) {
    auto it = all.find(others[candidates[k]]);
    if (it == all.end()) continue;
    auto v = safe_jsd(own, build_distribution(resolve_items(*ctx.items, it->second), ctx.clusters));
    if (v) {
      frag += *v;
      ++pairs;
    }
  }
  if (pairs > 0) m.fragmentation = frag / static_cast<double>(pairs);
  return m;
}

namespace {

struct UserTask {
  const std::string* user;
  const std::vector<std::string>* recs;
};

UserMetrics evaluate_user(const EvalContext& ctx, const UserTask& task,
                          const Recommendations& recs, std::span<const std::string> users,
                          const Predictions* predictions,
                          const std::map<std::string, std::vector<const Impression*>>& by_user,
                          const EvalOptions& opts) {
  const auto& user = *task.user;
  const auto& list = *task.recs;
  UserMetrics m = radio_user(ctx, user, list, recs, users, opts);
  const auto items = resolve_items(*ctx.items, list);

  auto gini_of = [&](const Dimension& dim) -> std::optional<double> {
    if (items.empty()) return std::nullopt;
    return gini(build_distribution(items, dim));
  };
  m.cat_gini = gini_of(ctx.category);
  m.sent_gini = gini_of(ctx.sentiment);
  m.party_gini = gini_of(ctx.party);
  m.cat_ild = ild(items, ctx.category);
  m.sent_ild = ild(items, ctx.sentiment);
  m.party_ild = ild(items, ctx.party);
  m.cat_eild = eild(items, ctx.category);
  m.sent_eild = eild(items, ctx.sentiment);
  m.party_eild = eild(items, ctx.party);

  if (auto it = ctx.clicked.find(user); it != ctx.clicked.end()) {
    m.alpha_ndcg = alpha_ndcg(list, it->second, ctx.aspects, opts.alpha);
  }
  if (!ctx.genre_probability.empty()) {
    std::vector<std::vector<std::string>> genres;
    for (const Item* item : items) genres.push_back({item->category});
    m.binomial_diversity = binomial_diversity(genres, ctx.genre_probability);
  }
  if (predictions) {
    auto imps = by_user.find(user);
    if (imps != by_user.end()) {
      static const UserScores kNone;
      auto pit = predictions->find(user);
      const UserScores& scores = pit == predictions->end() ? kNone : pit->second;
      double total = 0.0;
      std::size_t used = 0;
      for (const Impression* imp : imps->second) {
        if (auto v = impression_auc(scores, *imp)) {
          total += *v;
          ++used;
        }
      }
      if (used > 0) m.auc = total / static_cast<double>(used);
    }
  }
  return m;
}

class Mean {
 public:
  void add(const std::optional<double>& v) {
    if (v) {
      sum_ += *v;
      ++n_;
    }
  }
  std::optional<double> value() const {
    if (n_ == 0) return std::nullopt;
    return sum_ / static_cast<double>(n_);
  }

 private:
  double sum_ = 0.0;
  std::size_t n_ = 0;
};

template <typename Loop>
MetricReport evaluate_impl(const EvalContext& ctx, const Recommendations& recs,
                           const Predictions* predictions,
                           std::span<const Impression> impressions, const EvalOptions& opts,
                           Loop&& loop) {
  std::vector<UserTask> tasks;
  std::vector<std::string> users;
  for (const auto& [user, list] : recs) {
    tasks.push_back({&user, &list});
    users.push_back(user);
  }
  std::map<std::string, std::vector<const Impression*>> by_user;
  for (const auto& imp : impressions) {
    if (recs.contains(imp.user_id)) by_user[imp.user_id].push_back(&imp);
  }

  std::vector<UserMetrics> results(tasks.size());
  loop(tasks.size(), [&](std::size_t k) {
    results[k] = evaluate_user(ctx, tasks[k], recs, users, predictions, by_user, opts);
  });

  MetricReport report;
  Mean activation, cat_cal, comp_cal, frag, alt, repr, cg, sg, pg, ci, si, pi, ce, se, pe, an, bd;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& m = results[k];
    activation.add(m.activation);
    cat_cal.add(m.cat_calibration);
    comp_cal.add(m.comp_calibration);
    frag.add(m.fragmentation);
    alt.add(m.alt_voices);
    repr.add(m.representation);
    cg.add(m.cat_gini);
    sg.add(m.sent_gini);
    pg.add(m.party_gini);
    ci.add(m.cat_ild);
    si.add(m.sent_ild);
    pi.add(m.party_ild);
    ce.add(m.cat_eild);
    se.add(m.sent_eild);
    pe.add(m.party_eild);
    an.add(m.alpha_ndcg);
    bd.add(m.binomial_diversity);
    report.per_user.emplace(*tasks[k].user, m);
  }
  auto& t = report.table;
  t.activation = activation.value();
  t.cat_calibration = cat_cal.value();
  t.comp_calibration = comp_cal.value();
  t.fragmentation = frag.value();
  t.alt_voices = alt.value();
  t.representation = repr.value();
  t.cat_gini = cg.value();
  t.sent_gini = sg.value();
  t.party_gini = pg.value();
  t.cat_ild = ci.value();
  t.sent_ild = si.value();
  t.party_ild = pi.value();
  report.cat_eild = ce.value();
  report.sent_eild = se.value();
  report.party_eild = pe.value();
  report.alpha_ndcg = an.value();
  report.binomial_diversity = bd.value();

  if (predictions) {
    std::vector<Impression> scoped;
    for (const auto& [user, imps] : by_user) {
      for (const Impression* imp : imps) scoped.push_back(*imp);
    }
    report.auc_detail = auc(*predictions, scoped);
    if (report.auc_detail.users > 0) t.auc = report.auc_detail.auc;
  }
  return report;
}

}  // namespace

MetricReport evaluate(const EvalContext& ctx, const Recommendations& recs,
                      const Predictions* predictions, std::span<const Impression> impressions,
                      const EvalOptions& opts) {
  return evaluate_impl(ctx, recs, predictions, impressions, opts, [](std::size_t n, auto&& body) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t k = 0; k < count; ++k) body(static_cast<std::size_t>(k));
  });
}

MetricReport evaluate_serial(const EvalContext& ctx, const Recommendations& recs,
                             const Predictions* predictions,
                             std::span<const Impression> impressions, const EvalOptions& opts) {
  return evaluate_impl(ctx, recs, predictions, impressions, opts, [](std::size_t n, auto&& body) {
    for (std::size_t k = 0; k < n; ++k) body(k);
  });
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
  nlohmann::json table_json = nlohmann::json::object();
  const auto values = table.values();
  for (std::size_t c = 0; c < kTableColumns.size(); ++c) {
    table_json[std::string(kTableColumns[c])] = opt_json(values[c]);
  }
  nlohmann::json users = nlohmann::json::object();
  for (const auto& [user, m] : per_user) {
    users[user] = {{"activation", opt_json(m.activation)},
                   {"cat_calibration", opt_json(m.cat_calibration)},
                   {"comp_calibration", opt_json(m.comp_calibration)},
                   {"fragmentation", opt_json(m.fragmentation)},
                   {"alt_voices", opt_json(m.alt_voices)},
                   {"representation", opt_json(m.representation)},
                   {"cat_gini", opt_json(m.cat_gini)},
                   {"sent_gini", opt_json(m.sent_gini)},
                   {"party_gini", opt_json(m.party_gini)},
                   {"cat_ild", opt_json(m.cat_ild)},
                   {"sent_ild", opt_json(m.sent_ild)},
                   {"party_ild", opt_json(m.party_ild)},
                   {"cat_eild", opt_json(m.cat_eild)},
                   {"sent_eild", opt_json(m.sent_eild)},
                   {"party_eild", opt_json(m.party_eild)},
                   {"alpha_ndcg", opt_json(m.alpha_ndcg)},
                   {"binomial_diversity", opt_json(m.binomial_diversity)},
                   {"auc", opt_json(m.auc)}};
  }
  return {{"table", table_json},
          {"extra",
           {{"cat_eild", opt_json(cat_eild)},
            {"sent_eild", opt_json(sent_eild)},
            {"party_eild", opt_json(party_eild)},
            {"alpha_ndcg", opt_json(alpha_ndcg)},
            {"binomial_diversity", opt_json(binomial_diversity)},
            {"auc_users", auc_detail.users},
            {"auc_impressions_used", auc_detail.impressions_used},
            {"auc_impressions_skipped", auc_detail.impressions_skipped},
            {"auc_missing_scores", auc_detail.missing_scores}}},
          {"per_user", users}};
}

}  // namespace nrs
