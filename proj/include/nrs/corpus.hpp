#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nrs {

// Role of a party as configured by the user-supplied party map.
enum class PartyRole { Governing, Opposition, Other };

// Bucket of an article by the parties it mentions. Enumerator order is the
// class order of the party dimension.
enum class PartyLabel { Governing = 0, Opposition, Both, Other, None };

inline constexpr std::size_t kPartyLabelCount = 5;

std::string_view to_string(PartyLabel label);
std::optional<PartyLabel> parse_party_label(std::string_view s);

using PartyMap = std::map<std::string, PartyRole, std::less<>>;

struct Item {
  std::string item_id;
  std::string title;
  std::string category;
  std::optional<double> sentiment;  // [-1, 1]
  std::vector<std::string> party_mentions;
  PartyLabel party_label = PartyLabel::None;
  std::optional<double> complexity;
  std::optional<std::int64_t> story_cluster;
  std::optional<std::int64_t> published_at;
};

// Both > Governing > Opposition > Other > None. Parties missing from the map
// count as Other.
PartyLabel derive_party_label(const std::vector<std::string>& mentions,
                              const PartyMap& party_map);

struct HistoryEvent {
  std::string user_id;
  std::string item_id;
  std::optional<std::int64_t> timestamp;
};

struct ImpressionEntry {
  std::string item_id;
  bool clicked = false;
};

struct Impression {
  std::string impression_id;
  std::string user_id;
  std::optional<std::int64_t> timestamp;
  std::vector<ImpressionEntry> shown;
};

using ItemCatalog = std::map<std::string, Item, std::less<>>;

struct Corpus {
  ItemCatalog items;
  std::map<std::string, std::vector<HistoryEvent>, std::less<>> histories;
  std::vector<Impression> impressions;
  PartyMap party_map;
};

struct CleanReport {
  std::size_t items_removed = 0;
  std::size_t users_removed = 0;
  std::size_t test_users_removed = 0;
  std::size_t impressions_removed = 0;
  std::size_t history_events_removed = 0;
  std::size_t impression_entries_removed = 0;

  bool unchanged() const {
    return items_removed == 0 && users_removed == 0 && test_users_removed == 0 &&
           impressions_removed == 0 && history_events_removed == 0 &&
           impression_entries_removed == 0;
  }
};

struct CleanOptions {
  // Impressions form the test set; drop those of users without training history.
  bool drop_cold_test_users = true;
};

// Loaders. Malformed input raises ValidationError naming file, line and field.
PartyMap load_party_map(const std::filesystem::path& path);
ItemCatalog load_items(const std::filesystem::path& path, const PartyMap& party_map);
std::map<std::string, std::vector<HistoryEvent>, std::less<>> load_histories(
    const std::filesystem::path& path);
std::vector<Impression> load_impressions(const std::filesystem::path& path);

Corpus load_corpus(const std::filesystem::path& items_path,
                   const std::filesystem::path& history_path,
                   const std::filesystem::path& impressions_path,
                   const std::filesystem::path& party_map_path);

Item item_from_json(const nlohmann::json& j, const PartyMap& party_map);
nlohmann::json item_to_json(const Item& item);

// Parses a MIND-style `itemid-1 itemid-0 ...` token list.
std::vector<ImpressionEntry> parse_shown(std::string_view shown);
std::string format_shown(const std::vector<ImpressionEntry>& shown);

std::pair<Corpus, CleanReport> clean_corpus(Corpus corpus, const CleanOptions& options = {});

// Sparse user-item matrix, stored both row-major (by user) and column-major
// (by item). Indices follow lexicographic id order.
class InteractionMatrix {
 public:
  struct Triplet {
    std::string user_id;
    std::string item_id;
    double weight = 1.0;
  };

  InteractionMatrix() = default;

  // Duplicate (user, item) pairs collapse to a single entry keeping the first
  // weight. Non-positive weights are rejected.
  static InteractionMatrix from_triplets(std::vector<Triplet> triplets);
  static InteractionMatrix from_pairs(
      const std::vector<std::pair<std::string, std::string>>& pairs);

  std::size_t user_count() const { return users_.size(); }
  std::size_t item_count() const { return items_.size(); }
  std::size_t entry_count() const { return user_items_.size(); }

  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& items() const { return items_; }

  std::optional<std::size_t> user_index(std::string_view id) const;
  std::optional<std::size_t> item_index(std::string_view id) const;

  struct Entry {
    std::uint32_t index;
    double weight;
  };
  std::vector<Entry> user_row(std::size_t u) const;
  std::vector<Entry> item_column(std::size_t i) const;

  // Raw CSR / CSC views for kernels.
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& user_items() const { return user_items_; }
  const std::vector<double>& user_weights() const { return user_weights_; }
  const std::vector<std::size_t>& col_ptr() const { return col_ptr_; }
  const std::vector<std::uint32_t>& item_users() const { return item_users_; }
  const std::vector<double>& item_weights() const { return item_weights_; }

  double user_degree(std::size_t u) const { return user_degree_[u]; }
  double item_degree(std::size_t i) const { return item_degree_[i]; }

 private:
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> user_items_;
  std::vector<double> user_weights_;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::uint32_t> item_users_;
  std::vector<double> item_weights_;
  std::vector<double> user_degree_;
  std::vector<double> item_degree_;
};

// One weight-1 entry per distinct (user, history item) pair.
InteractionMatrix build_matrix(const Corpus& corpus);

// Explicit pool is returned verbatim; otherwise the sorted union of items shown
// in impressions.
std::vector<std::string> resolve_pool(
    const Corpus& corpus, const std::optional<std::vector<std::string>>& article_pool);

}  // namespace nrs
