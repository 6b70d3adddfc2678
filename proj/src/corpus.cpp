#include "nrs/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "nrs/error.hpp"
#include "nrs/util.hpp"

namespace nrs {

namespace {

[[noreturn]] void fail(const std::filesystem::path& file, std::size_t line,
                       std::string_view field, std::string_view what) {
  std::ostringstream msg;
  msg << file.string() << ":" << line << ": field '" << field << "': " << what;
  throw ValidationError(msg.str());
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer");
  }
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

bool is_header(const std::vector<std::string>& fields, std::string_view first) {
  return !fields.empty() && trim(fields[0]) == first;
}

}  // namespace

std::string_view to_string(PartyLabel label) {
  switch (label) {
    case PartyLabel::Governing: return "governing";
    case PartyLabel::Opposition: return "opposition";
    case PartyLabel::Both: return "both";
    case PartyLabel::Other: return "other";
    case PartyLabel::None: return "none";
  }
  return "none";
}

std::optional<PartyLabel> parse_party_label(std::string_view s) {
  for (std::size_t i = 0; i < kPartyLabelCount; ++i) {
    auto label = static_cast<PartyLabel>(i);
    if (to_string(label) == s) return label;
  }
  return std::nullopt;
}

PartyLabel derive_party_label(const std::vector<std::string>& mentions,
                              const PartyMap& party_map) {
  if (mentions.empty()) return PartyLabel::None;
  bool governing = false;
  bool opposition = false;
  for (const auto& party : mentions) {
    auto it = party_map.find(party);
    if (it == party_map.end()) continue;
    governing |= it->second == PartyRole::Governing;
    opposition |= it->second == PartyRole::Opposition;
  }
  if (governing && opposition) return PartyLabel::Both;
  if (governing) return PartyLabel::Governing;
  if (opposition) return PartyLabel::Opposition;
  return PartyLabel::Other;
}

PartyMap load_party_map(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(path, 1, "<document>", e.what());
  }
  if (!j.is_object()) fail(path, 1, "<document>", "expected a JSON object");
  PartyMap map;
  for (const auto& [name, role] : j.items()) {
    if (!role.is_string()) fail(path, 1, name, "role must be a string");
    const auto r = role.get<std::string>();
    if (r == "governing") {
      map.emplace(name, PartyRole::Governing);
    } else if (r == "opposition") {
      map.emplace(name, PartyRole::Opposition);
    } else if (r == "other") {
      map.emplace(name, PartyRole::Other);
    } else {
      fail(path, 1, name, "unknown role '" + r + "'");
    }
  }
  return map;
}

Item item_from_json(const nlohmann::json& j, const PartyMap& party_map) {
  if (!j.is_object()) throw std::invalid_argument("<record>: expected a JSON object");
  Item item;
  auto field = [&](const char* name) -> const nlohmann::json* {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return nullptr;
    return &*it;
  };
  auto require = [](bool ok, const char* name, const char* what) {
    if (!ok) throw std::invalid_argument(std::string(name) + ": " + what);
  };

  const auto* id = field("item_id");
  require(id && id->is_string() && !id->get<std::string>().empty(), "item_id",
          "missing or not a non-empty string");
  item.item_id = id->get<std::string>();

  if (const auto* t = field("title")) {
    require(t->is_string(), "title", "not a string");
    item.title = t->get<std::string>();
  }
  if (const auto* c = field("category")) {
    require(c->is_string(), "category", "not a string");
    item.category = c->get<std::string>();
  }
  if (const auto* s = field("sentiment")) {
    require(s->is_number(), "sentiment", "not a number");
    double v = s->get<double>();
    require(v >= -1.0 && v <= 1.0, "sentiment", "outside [-1, 1]");
    item.sentiment = v;
  }
  if (const auto* p = field("party_mentions")) {
    require(p->is_array(), "party_mentions", "not an array");
    std::set<std::string> seen;
    for (const auto& e : *p) {
      require(e.is_string(), "party_mentions", "element not a string");
      if (seen.insert(e.get<std::string>()).second) {
        item.party_mentions.push_back(e.get<std::string>());
      }
    }
  }
  if (const auto* c = field("complexity")) {
    require(c->is_number(), "complexity", "not a number");
    require(c->get<double>() >= 0.0, "complexity", "negative");
    item.complexity = c->get<double>();
  }
  if (const auto* c = field("story_cluster")) {
    require(c->is_number_integer(), "story_cluster", "not an integer");
    require(c->get<std::int64_t>() >= 0, "story_cluster", "negative");
    item.story_cluster = c->get<std::int64_t>();
  }
  if (const auto* t = field("published_at")) {
    require(t->is_number_integer(), "published_at", "not an integer");
    item.published_at = t->get<std::int64_t>();
  }
  item.party_label = derive_party_label(item.party_mentions, party_map);
  return item;
}

nlohmann::json item_to_json(const Item& item) {
  nlohmann::json j;
  j["item_id"] = item.item_id;
  j["title"] = item.title;
  j["category"] = item.category;
  j["sentiment"] = item.sentiment ? nlohmann::json(*item.sentiment) : nlohmann::json();
  j["party_mentions"] = item.party_mentions;
  j["party_label"] = to_string(item.party_label);
  j["complexity"] = item.complexity ? nlohmann::json(*item.complexity) : nlohmann::json();
  j["story_cluster"] =
      item.story_cluster ? nlohmann::json(*item.story_cluster) : nlohmann::json();
  j["published_at"] =
      item.published_at ? nlohmann::json(*item.published_at) : nlohmann::json();
  return j;
}

ItemCatalog load_items(const std::filesystem::path& path, const PartyMap& party_map) {
  auto in = open_or_throw(path);
  ItemCatalog items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(path, lineno, "<record>", e.what());
    }
    Item item;
    try {
      item = item_from_json(j, party_map);
    } catch (const std::invalid_argument& e) {
      std::string what = e.what();
      auto colon = what.find(':');
      fail(path, lineno, what.substr(0, colon), trim(what.substr(colon + 1)));
    }
    auto id = item.item_id;
    if (!items.emplace(id, std::move(item)).second) {
      fail(path, lineno, "item_id", "duplicate item_id '" + id + "'");
    }
  }
  return items;
}

std::map<std::string, std::vector<HistoryEvent>, std::less<>> load_histories(
    const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::map<std::string, std::vector<HistoryEvent>, std::less<>> histories;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(trim(line), ',');
    if (lineno == 1 && is_header(fields, "user_id")) continue;
    if (fields.size() < 2 || fields.size() > 3) {
      fail(path, lineno, "<row>", "expected user_id,item_id,timestamp");
    }
    HistoryEvent ev;
    ev.user_id = std::string(trim(fields[0]));
    ev.item_id = std::string(trim(fields[1]));
    if (ev.user_id.empty()) fail(path, lineno, "user_id", "empty");
    if (ev.item_id.empty()) fail(path, lineno, "item_id", "empty");
    if (fields.size() == 3) {
      try {
        ev.timestamp = parse_int(fields[2]);
      } catch (const std::invalid_argument&) {
        fail(path, lineno, "timestamp", "not an integer");
      }
    }
    histories[ev.user_id].push_back(std::move(ev));
  }
  // Timestamps, when present on every event of a user, define the order;
  // otherwise file order stands.
  for (auto& [user, events] : histories) {
    bool all_stamped = std::all_of(events.begin(), events.end(),
                                   [](const HistoryEvent& e) { return e.timestamp.has_value(); });
    if (all_stamped) {
      std::stable_sort(events.begin(), events.end(),
                       [](const HistoryEvent& a, const HistoryEvent& b) {
                         return *a.timestamp < *b.timestamp;
                       });
    }
  }
  return histories;
}

std::vector<ImpressionEntry> parse_shown(std::string_view shown) {
  std::vector<ImpressionEntry> out;
  std::istringstream ss{std::string(shown)};
  std::string token;
  std::set<std::string> seen;
  while (ss >> token) {
    auto dash = token.rfind('-');
    if (dash == std::string::npos || dash == 0 || dash + 2 != token.size() ||
        (token[dash + 1] != '0' && token[dash + 1] != '1')) {
      throw std::invalid_argument("bad token '" + token + "'");
    }
    ImpressionEntry e{token.substr(0, dash), token[dash + 1] == '1'};
    if (!seen.insert(e.item_id).second) {
      throw std::invalid_argument("item '" + e.item_id + "' listed twice");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_shown(const std::vector<ImpressionEntry>& shown) {
  std::string out;
  for (const auto& e : shown) {
    if (!out.empty()) out.push_back(' ');
    out += e.item_id;
    out += e.clicked ? "-1" : "-0";
  }
  return out;
}

std::vector<Impression> load_impressions(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<Impression> impressions;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(trim(line), ',');
    if (lineno == 1 && is_header(fields, "impression_id")) continue;
    if (fields.size() != 4) {
      fail(path, lineno, "<row>", "expected impression_id,user_id,timestamp,shown");
    }
    Impression imp;
    imp.impression_id = std::string(trim(fields[0]));
    imp.user_id = std::string(trim(fields[1]));
    if (imp.impression_id.empty()) fail(path, lineno, "impression_id", "empty");
    if (imp.user_id.empty()) fail(path, lineno, "user_id", "empty");
    try {
      imp.timestamp = parse_int(fields[2]);
    } catch (const std::invalid_argument&) {
      fail(path, lineno, "timestamp", "not an integer");
    }
    try {
      imp.shown = parse_shown(fields[3]);
    } catch (const std::invalid_argument& e) {
      fail(path, lineno, "shown", e.what());
    }
    if (imp.shown.empty()) fail(path, lineno, "shown", "empty impression");
    impressions.push_back(std::move(imp));
  }
  return impressions;
}

Corpus load_corpus(const std::filesystem::path& items_path,
                   const std::filesystem::path& history_path,
                   const std::filesystem::path& impressions_path,
                   const std::filesystem::path& party_map_path) {
  Corpus c;
  c.party_map = load_party_map(party_map_path);
  c.items = load_items(items_path, c.party_map);
  c.histories = load_histories(history_path);
  c.impressions = load_impressions(impressions_path);
  return c;
}

std::pair<Corpus, CleanReport> clean_corpus(Corpus corpus, const CleanOptions& options) {
  CleanReport report;

  for (auto it = corpus.items.begin(); it != corpus.items.end();) {
    const Item& item = it->second;
    if (item.category.empty() || !item.sentiment.has_value()) {
      it = corpus.items.erase(it);
      ++report.items_removed;
    } else {
      ++it;
    }
  }

  for (auto it = corpus.histories.begin(); it != corpus.histories.end();) {
    auto& events = it->second;
    auto before = events.size();
    std::erase_if(events, [&](const HistoryEvent& e) { return !corpus.items.contains(e.item_id); });
    report.history_events_removed += before - events.size();
    if (events.empty()) {
      it = corpus.histories.erase(it);
      ++report.users_removed;
    } else {
      ++it;
    }
  }

  std::set<std::string> cold_test_users;
  std::erase_if(corpus.impressions, [&](Impression& imp) {
    auto before = imp.shown.size();
    std::erase_if(imp.shown,
                  [&](const ImpressionEntry& e) { return !corpus.items.contains(e.item_id); });
    report.impression_entries_removed += before - imp.shown.size();
    bool cold = options.drop_cold_test_users && !corpus.histories.contains(imp.user_id);
    if (cold) cold_test_users.insert(imp.user_id);
    bool drop = imp.shown.empty() || cold;
    if (drop) ++report.impressions_removed;
    return drop;
  });
  report.test_users_removed = cold_test_users.size();
  return {std::move(corpus), report};
}

InteractionMatrix InteractionMatrix::from_triplets(std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (!(t.weight > 0.0)) {
      throw ValidationError("interaction weight must be positive for (" + t.user_id + ", " +
                            t.item_id + ")");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.user_id, a.item_id) < std::tie(b.user_id, b.item_id);
  });
  triplets.erase(std::unique(triplets.begin(), triplets.end(),
                             [](const Triplet& a, const Triplet& b) {
                               return a.user_id == b.user_id && a.item_id == b.item_id;
                             }),
                 triplets.end());
  if (triplets.empty()) throw ValidationError("cannot build an empty interaction matrix");

  InteractionMatrix m;
  for (const auto& t : triplets) {
    if (m.users_.empty() || m.users_.back() != t.user_id) m.users_.push_back(t.user_id);
    m.items_.push_back(t.item_id);
  }
  std::sort(m.items_.begin(), m.items_.end());
  m.items_.erase(std::unique(m.items_.begin(), m.items_.end()), m.items_.end());

  const std::size_t nu = m.users_.size();
  const std::size_t ni = m.items_.size();
  m.row_ptr_.assign(nu + 1, 0);
  m.user_degree_.assign(nu, 0.0);
  m.item_degree_.assign(ni, 0.0);
  std::vector<std::size_t> col_counts(ni, 0);

  std::size_t u = 0;
  for (const auto& t : triplets) {
    while (m.users_[u] != t.user_id) ++u;
    auto i = static_cast<std::uint32_t>(
        std::lower_bound(m.items_.begin(), m.items_.end(), t.item_id) - m.items_.begin());
    m.user_items_.push_back(i);
    m.user_weights_.push_back(t.weight);
    ++m.row_ptr_[u + 1];
    m.user_degree_[u] += t.weight;
    m.item_degree_[i] += t.weight;
    ++col_counts[i];
  }
  for (std::size_t r = 0; r < nu; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];

  m.col_ptr_.assign(ni + 1, 0);
  for (std::size_t i = 0; i < ni; ++i) m.col_ptr_[i + 1] = m.col_ptr_[i] + col_counts[i];
  m.item_users_.resize(m.user_items_.size());
  m.item_weights_.resize(m.user_items_.size());
  std::vector<std::size_t> fill(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  for (std::size_t r = 0; r < nu; ++r) {
    for (std::size_t k = m.row_ptr_[r]; k < m.row_ptr_[r + 1]; ++k) {
      auto i = m.user_items_[k];
      m.item_users_[fill[i]] = static_cast<std::uint32_t>(r);
      m.item_weights_[fill[i]] = m.user_weights_[k];
      ++fill[i];
    }
  }
  return m;
}

InteractionMatrix InteractionMatrix::from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<Triplet> triplets;
  triplets.reserve(pairs.size());
  for (const auto& [u, i] : pairs) triplets.push_back({u, i, 1.0});
  return from_triplets(std::move(triplets));
}

std::optional<std::size_t> InteractionMatrix::user_index(std::string_view id) const {
  auto it = std::lower_bound(users_.begin(), users_.end(), id);
  if (it == users_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - users_.begin());
}

std::optional<std::size_t> InteractionMatrix::item_index(std::string_view id) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), id);
  if (it == items_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - items_.begin());
}

std::vector<InteractionMatrix::Entry> InteractionMatrix::user_row(std::size_t u) const {
  std::vector<Entry> out;
  for (std::size_t k = row_ptr_[u]; k < row_ptr_[u + 1]; ++k) {
    out.push_back({user_items_[k], user_weights_[k]});
  }
  return out;
}

std::vector<InteractionMatrix::Entry> InteractionMatrix::item_column(std::size_t i) const {
  std::vector<Entry> out;
  for (std::size_t k = col_ptr_[i]; k < col_ptr_[i + 1]; ++k) {
    out.push_back({item_users_[k], item_weights_[k]});
  }
  return out;
}

InteractionMatrix build_matrix(const Corpus& corpus) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [user, events] : corpus.histories) {
    for (const auto& e : events) pairs.emplace_back(user, e.item_id);
  }
  return InteractionMatrix::from_pairs(pairs);
}

std::vector<std::string> resolve_pool(
    const Corpus& corpus, const std::optional<std::vector<std::string>>& article_pool) {
  if (article_pool) {
    for (const auto& id : *article_pool) {
      if (!corpus.items.contains(id)) {
        throw ValidationError("article pool references unknown item '" + id + "'");
      }
    }
    return *article_pool;
  }
  std::set<std::string> pool;
  for (const auto& imp : corpus.impressions) {
    for (const auto& e : imp.shown) pool.insert(e.item_id);
  }
  return {pool.begin(), pool.end()};
}

}  // namespace nrs
