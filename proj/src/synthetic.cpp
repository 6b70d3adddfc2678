#include "nrs/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <cmath>

#include "nrs/util.hpp"

namespace nrs {

namespace {

constexpr std::array<const char*, 5> kCategories = {"politics", "economy", "world", "culture",
                                                    "sports"};
constexpr std::array<double, 5> kSentimentEdges = {-1.0, -0.5, 0.0, 0.5, 1.0};
constexpr std::int64_t kEpoch = 1700000000;

std::vector<std::string> mentions_for(PartyLabel label, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  const std::string gov = coin(rng) ? "A" : "B";
  const std::string opp = coin(rng) ? "C" : "D";
  const std::string oth = coin(rng) ? "E" : "F";
  switch (label) {
    case PartyLabel::Governing: return {gov};
    case PartyLabel::Opposition: return {opp};
    case PartyLabel::Both: return {gov, opp};
    case PartyLabel::Other: return {oth};
    case PartyLabel::None: return {};
  }
  return {};
}

}  // namespace

Corpus make_synthetic(const SyntheticOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  Corpus c;
  c.party_map = {{"A", PartyRole::Governing}, {"B", PartyRole::Governing},
                 {"C", PartyRole::Opposition}, {"D", PartyRole::Opposition},
                 {"E", PartyRole::Other},      {"F", PartyRole::Other}};

  std::vector<std::string> ids;
  std::size_t n = 0;
  for (std::size_t p = 0; p < kPartyLabelCount; ++p) {
    for (std::size_t s = 0; s + 1 < kSentimentEdges.size(); ++s) {
      std::uniform_real_distribution<double> sent(kSentimentEdges[s] + 0.01,
                                                  kSentimentEdges[s + 1] - 0.01);
      for (std::size_t k = 0; k < opts.items_per_combo; ++k, ++n) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "N%04zu", n);
        Item item;
        item.item_id = buf;
        item.title = "Synthetic article " + std::to_string(n);
        item.category = kCategories[n % kCategories.size()];
        item.sentiment = std::round(sent(rng) * 1000.0) / 1000.0;
        item.party_mentions = mentions_for(static_cast<PartyLabel>(p), rng);
        item.party_label = derive_party_label(item.party_mentions, c.party_map);
        item.complexity = std::round(std::uniform_real_distribution<double>(5.0, 95.0)(rng) * 10.0) / 10.0;
        item.story_cluster = static_cast<std::int64_t>(rng() % opts.story_clusters);
        item.published_at = kEpoch + static_cast<std::int64_t>(rng() % 86400);
        ids.push_back(item.item_id);
        c.items.emplace(item.item_id, std::move(item));
      }
    }
  }

  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = ids.size();
  auto next_item = [&]() -> const std::string& {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    return ids[order[cursor++]];
  };

  for (std::size_t u = 0; u < opts.users; ++u) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "U%03zu", u);
    const std::string user = buf;
    std::vector<std::string> picked = ids;
    std::shuffle(picked.begin(), picked.end(), rng);
    picked.resize(std::min(opts.history_length, picked.size()));
    auto& events = c.histories[user];
    for (std::size_t k = 0; k < picked.size(); ++k) {
      events.push_back({user, picked[k], kEpoch + static_cast<std::int64_t>(k) * 60});
    }
  }

  std::size_t imp = 0;
  for (const auto& [user, events] : c.histories) {
    for (std::size_t k = 0; k < opts.impressions_per_user; ++k, ++imp) {
      Impression im;
      im.impression_id = "I" + std::to_string(imp);
      im.user_id = user;
      im.timestamp = kEpoch + 86400 + static_cast<std::int64_t>(imp);
      std::set<std::string> seen;
      while (im.shown.size() < opts.impression_size && seen.size() < ids.size()) {
        const auto& id = next_item();
        if (seen.insert(id).second) im.shown.push_back({id, false});
      }
      const std::size_t clicks = 1 + rng() % 2;
      for (std::size_t j = 0; j < clicks && j < im.shown.size(); ++j) {
        im.shown[rng() % im.shown.size()].clicked = true;
      }
      c.impressions.push_back(std::move(im));
    }
  }
  return c;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::string items;
  for (const auto& [id, item] : corpus.items) {
    items += item_to_json(item).dump();
    items += '\n';
  }
  write_file(dir / "items.jsonl", items);

  std::string history = "user_id,item_id,timestamp\n";
  for (const auto& [user, events] : corpus.histories) {
    for (const auto& e : events) {
      history += user + "," + e.item_id + "," +
                 (e.timestamp ? std::to_string(*e.timestamp) : std::string()) + "\n";
    }
  }
  write_file(dir / "history.csv", history);

  std::string imps = "impression_id,user_id,timestamp,shown\n";
  for (const auto& im : corpus.impressions) {
    imps += im.impression_id + "," + im.user_id + "," +
            (im.timestamp ? std::to_string(*im.timestamp) : std::string()) + "," +
            format_shown(im.shown) + "\n";
  }
  write_file(dir / "impressions.csv", imps);

  nlohmann::ordered_json parties = nlohmann::ordered_json::object();
  for (const auto& [name, role] : corpus.party_map) {
    parties[name] = role == PartyRole::Governing    ? "governing"
                    : role == PartyRole::Opposition ? "opposition"
                                                    : "other";
  }
  write_file(dir / "party_map.json", parties.dump(2) + "\n");
}

}  // namespace nrs
