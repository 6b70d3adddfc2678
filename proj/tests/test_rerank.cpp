#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "nrs/error.hpp"
#include "nrs/rerank.hpp"

using namespace nrs;

namespace {

RankedList candidates_from(const ItemCatalog& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RankedList list{"u", {}};
  for (const auto& [id, it] : items) list.entries.push_back({id, std::generate_canonical<double, 53>(rng)});
  std::sort(list.entries.begin(), list.entries.end(),
            [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
  return list;
}

RerankConfig cfg_for(RerankMethod m, NTD ntd = default_ntd(), std::size_t n = 20) {
  RerankConfig c;
  c.method = m;
  c.name = std::string(to_string(m));
  c.ntd = std::move(ntd);
  c.list_size = n;
  return c;
}

std::vector<std::size_t> class_counts(const RankedList& list, const ItemCatalog& items,
                                      const Dimension& dim) {
  std::vector<std::size_t> out(dim.size(), 0);
  for (const auto& e : list.entries) ++out[assign_class(items.at(e.id), dim)];
  return out;
}

NTD single_dimension(Dimension dim, std::vector<double> p) {
  NTD ntd;
  ntd.dimensions.push_back({std::move(dim), std::move(p), 1.0});
  return ntd;
}

Dimension two_bins() { return Dimension::intervals("sentiment", DimensionKind::SentimentBin, {-1, 0, 1}); }

}  // namespace

TEST_CASE("MMR with lambda 1 keeps candidate order") {
  const auto items = fixtures::rich_catalog(2);
  const auto cands = candidates_from(items, 1);
  auto cfg = cfg_for(RerankMethod::MMR);
  cfg.lambda = 1.0;
  CHECK(rerank_mmr(cands, items, cfg).entries == truncate(cands, 20).entries);
}

TEST_CASE("MMR with lambda 0 alternates two classes") {
  ItemCatalog items;
  RankedList cands{"u", {}};
  for (int k = 0; k < 4; ++k) {
    const std::string x = "x" + std::to_string(k), y = "y" + std::to_string(k);
    items.emplace(x, fixtures::item(x, PartyLabel::Governing, -0.8));
    items.emplace(y, fixtures::item(y, PartyLabel::None, 0.8));
    cands.entries.push_back({x, 10.0 - k});
  }
  for (int k = 0; k < 4; ++k) cands.entries.push_back({"y" + std::to_string(k), 5.0 - k});
  auto cfg = cfg_for(RerankMethod::MMR);
  cfg.lambda = 0.0;
  const auto out = rerank_mmr(cands, items, cfg);
  REQUIRE(out.entries.size() == 8);
  CHECK(out.entries[0].id == "x0");
  for (std::size_t r = 0; r < out.entries.size(); ++r) {
    CHECK(out.entries[r].id[0] == (r % 2 == 0 ? 'x' : 'y'));
  }
}

TEST_CASE("MMR equals a brute-force greedy recomputation") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    ItemCatalog items;
    RankedList cands{"u", {}};
    std::vector<std::vector<double>> feats;
    for (int k = 0; k < 6; ++k) {
      const std::string id = "c" + std::to_string(k);
      const std::size_t p = rng() % 5, s = rng() % 4;
      items.emplace(id, fixtures::item(id, static_cast<PartyLabel>(p), fixtures::sentiment_in_bin(s)));
      cands.entries.push_back({id, std::generate_canonical<double, 53>(rng)});
    }
    std::sort(cands.entries.begin(), cands.entries.end(),
              [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
    auto cfg = cfg_for(RerankMethod::MMR, default_ntd(), 6);
    cfg.lambda = 0.5;

    // Oracle: one-hot party ++ sentiment vectors, explicit cosine, full rescan.
    std::map<std::string, std::vector<double>> f;
    for (const auto& e : cands.entries) {
      std::vector<double> v(9, 0.0);
      const auto& it = items.at(e.id);
      v[static_cast<std::size_t>(it.party_label)] = 1.0;
      const double s = *it.sentiment;
      v[5 + (s < -0.5 ? 0 : s < 0 ? 1 : s < 0.5 ? 2 : 3)] = 1.0;
      f[e.id] = v;
    }
    auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
      }
      return dot / std::sqrt(na * nb);
    };
    const double hi = cands.entries.front().score, lo = cands.entries.back().score;
    std::vector<std::string> selected;
    bool ambiguous = false;
    while (selected.size() < 6) {
      std::vector<std::pair<double, std::string>> values;
      for (const auto& e : cands.entries) {
        if (std::find(selected.begin(), selected.end(), e.id) != selected.end()) continue;
        double max_sim = 0.0;
        for (const auto& s : selected) max_sim = std::max(max_sim, cosine(f[e.id], f[s]));
        values.push_back({0.5 * (e.score - lo) / (hi - lo) - 0.5 * max_sim, e.id});
      }
      std::sort(values.begin(), values.end(), std::greater<>());
      if (values.size() > 1 && values[0].first - values[1].first < 1e-9) ambiguous = true;
      selected.push_back(values[0].second);
    }
    if (ambiguous) continue;
    CHECK(rerank_mmr(cands, items, cfg).ids() == selected);
  }
}

TEST_CASE("PM-2 proportionality") {
  SUBCASE("two equal aspects split the list in half") {
    ItemCatalog items;
    for (int k = 0; k < 60; ++k) {
      const std::string id = "p" + std::to_string(k);
      items.emplace(id, fixtures::item(id, PartyLabel::None, k % 3 == 0 ? -0.5 : 0.5));
    }
    const auto cands = candidates_from(items, 4);
    const auto out = rerank_pm2(cands, items, cfg_for(RerankMethod::PM2, single_dimension(two_bins(), {.5, .5})));
    CHECK(class_counts(out, items, two_bins()) == std::vector<std::size_t>{10, 10});
  }
  SUBCASE("default party target on a rich pool") {
    const auto items = fixtures::rich_catalog(5);
    const auto party = default_ntd().dimensions[0];
    const auto out = rerank_pm2(candidates_from(items, 5), items,
                                cfg_for(RerankMethod::PM2, single_dimension(party.dimension, party.proportions)));
    CHECK(class_counts(out, items, party.dimension) == std::vector<std::size_t>{3, 3, 3, 3, 8});
  }
  SUBCASE("a single aspect with all the weight yields its top-N by relevance") {
    const auto items = fixtures::rich_catalog(5);
    const auto cands = candidates_from(items, 6);
    const auto party = Dimension::party_buckets();
    const auto out = rerank_pm2(cands, items,
                                cfg_for(RerankMethod::PM2, single_dimension(party, {0, 1, 0, 0, 0}), 10));
    std::vector<std::string> expected;
    for (const auto& e : cands.entries) {
      if (items.at(e.id).party_label == PartyLabel::Opposition && expected.size() < 10) {
        expected.push_back(e.id);
      }
    }
    CHECK(out.ids() == expected);
  }
}

TEST_CASE("G-KL") {
  SUBCASE("rich pool reaches both default quotas") {
    const auto items = fixtures::rich_catalog(5);
    const auto ntd = default_ntd();
    const auto out = rerank_gkl(candidates_from(items, 8), items, cfg_for(RerankMethod::GKL));
    CHECK(class_counts(out, items, ntd.dimensions[1].dimension) == std::vector<std::size_t>{4, 6, 6, 4});
    CHECK(class_counts(out, items, ntd.dimensions[0].dimension) ==
          std::vector<std::size_t>{3, 3, 3, 3, 8});
  }
  SUBCASE("appending to a list at its quotas strictly increases KL") {
    const auto ntd = default_ntd();
    const auto plan = quotas(ntd, 20);
    std::vector<std::vector<double>> counts;
    for (const auto& q : plan.per_dimension) counts.emplace_back(q.begin(), q.end());
    const double base = ntd_kl(ntd, counts);
    for (std::size_t p = 0; p < 5; ++p) {
      for (std::size_t s = 0; s < 4; ++s) {
        auto more = counts;
        more[0][p] += 1;
        more[1][s] += 1;
        CHECK(ntd_kl(ntd, more) > base);
      }
    }
  }
  SUBCASE("a single-class target picks only that class while available") {
    const auto items = fixtures::rich_catalog(2);
    const auto bins = default_sentiment_bins();
    const auto out = rerank_gkl(candidates_from(items, 9), items,
                                cfg_for(RerankMethod::GKL, single_dimension(bins, {0, 0, 1, 0}), 12));
    const auto counts = class_counts(out, items, bins);
    CHECK(counts[2] == 10);  // all of them
    for (std::size_t r = 0; r < 10; ++r) {
      CHECK(assign_class(items.at(out.entries[r].id), bins) == 2);
    }
  }
}

TEST_CASE("DAP") {
  const auto items = fixtures::rich_catalog(2);
  const auto cands = candidates_from(items, 12);
  auto cfg = cfg_for(RerankMethod::DAP, default_ntd(), 100);
  cfg.dap_penalty = 0.5;

  SessionState empty;
  empty.clicked_classes.resize(2);
  CHECK(rerank_dap(cands, empty, items, cfg).entries == cands.entries);

  SessionState state;
  const auto& clicked = items.at(cands.entries[0].id);
  state.record_click(clicked, cfg.ntd);
  const auto out = rerank_dap(cands, state, items, cfg);
  CHECK(out.entries.size() == cands.entries.size() - 1);
  std::map<std::string, double> base;
  for (const auto& e : cands.entries) base[e.id] = e.score;
  const auto party = Dimension::party_buckets();
  const auto bins = default_sentiment_bins();
  for (const auto& e : out.entries) {
    CHECK(e.id != clicked.item_id);
    const auto& it = items.at(e.id);
    const int m = (it.party_label == clicked.party_label ? 1 : 0) +
                  (assign_class(it, bins) == assign_class(clicked, bins) ? 1 : 0);
    CHECK(e.score == doctest::Approx(base[e.id] * std::pow(0.5, m)).epsilon(1e-15));
    if (m == 2) CHECK(e.score == doctest::Approx(base[e.id] * 0.25));
  }
  for (std::size_t r = 1; r < out.entries.size(); ++r) {
    CHECK(out.entries[r - 1].score >= out.entries[r].score);
  }

  // Single dimension: every remaining same-class item is scaled by gamma.
  auto one = cfg_for(RerankMethod::DAP, single_dimension(party, {.2, .2, .2, .2, .2}), 100);
  SessionState s1;
  s1.record_click(clicked, one.ntd);
  for (const auto& e : rerank_dap(cands, s1, items, one).entries) {
    const bool same = items.at(e.id).party_label == clicked.party_label;
    CHECK(e.score == doctest::Approx(base[e.id] * (same ? 0.5 : 1.0)));
  }
}

TEST_CASE("re-rankers output a permutation of a candidate subset") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 40; ++trial) {
    const auto items = fixtures::rich_catalog(1 + trial % 3);
    auto cands = candidates_from(items, rng());
    cands.entries.resize(5 + rng() % (cands.entries.size() - 5));
    std::set<std::string> ids;
    for (const auto& e : cands.entries) ids.insert(e.id);
    for (auto m : {RerankMethod::MMR, RerankMethod::PM2, RerankMethod::GKL, RerankMethod::DAP,
                   RerankMethod::None}) {
      auto cfg = cfg_for(m, default_ntd(), 1 + rng() % 25);
      cfg.lambda = std::generate_canonical<double, 53>(rng);
      const auto out = rerank(cands, items, cfg);
      CHECK(out.entries.size() == std::min(cfg.list_size, cands.entries.size()));
      std::set<std::string> seen;
      for (const auto& e : out.entries) {
        CHECK(ids.contains(e.id));
        CHECK(seen.insert(e.id).second);
      }
      CHECK(out == rerank(cands, items, cfg));
    }
  }
}

TEST_CASE("re-rank errors and config") {
  const auto items = fixtures::rich_catalog(1);
  RankedList empty{"u", {}};
  CHECK_THROWS_AS(rerank_mmr(empty, items, cfg_for(RerankMethod::MMR)), ValidationError);
  CHECK_THROWS_AS(rerank_pm2(empty, items, cfg_for(RerankMethod::PM2)), ValidationError);
  RankedList unknown{"u", {{"nope", 1.0}}};
  CHECK_THROWS_AS(rerank_gkl(unknown, items, cfg_for(RerankMethod::GKL)), ValidationError);

  const auto c = RerankConfig::from_json(nlohmann::json::parse(R"({"method":"pm2","lambda":0.3})"));
  CHECK(c.method == RerankMethod::PM2);
  CHECK(c.lambda == 0.3);
  auto bad = c;
  bad.lambda = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.dap_penalty = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
