#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nrs/corpus.hpp"

namespace nrs {

enum class SplitMethod {
  AttributeSort,
  DiversitySubset,
  AttributeStratified,
  DiversityStratified,
  ClusterStratified,
};

std::string_view to_string(SplitMethod m);
std::optional<SplitMethod> parse_split_method(std::string_view s);

struct SplitSpec {
  SplitMethod method = SplitMethod::AttributeStratified;
  double test_fraction = 0.2;
  std::optional<std::string> attribute;
  std::map<std::string, double> skew;
  std::optional<std::size_t> k_clusters;
  std::uint64_t seed = 0;
  bool descending = false;     // AttributeSort order
  std::size_t entropy_bands = 5;  // DiversityStratified

  void validate() const;
  static SplitSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

using UserItem = std::pair<std::string, std::string>;

struct Split {
  std::set<std::string> train_users;
  std::set<std::string> test_users;
  std::vector<UserItem> train_pairs;  // sorted
  std::vector<UserItem> test_pairs;   // sorted
  std::size_t dropped_pairs = 0;      // DiversitySubset only
};

// Distinct (user, item) pairs of the cleaned histories, sorted.
std::vector<UserItem> interaction_pairs(const Corpus& corpus);

// Class label of an item under a split attribute: "party", "category",
// "sentiment" (four bins), "polarity" (neg/pos), "complexity" (width-10 bins),
// "story_cluster". nullopt when the item lacks the attribute.
std::optional<std::string> attribute_class(const Item& item, std::string_view attribute);
// Orderable attributes: "sentiment", "complexity", "published_at".
std::optional<double> attribute_order_value(const Item& item, std::string_view attribute);
bool is_orderable_attribute(std::string_view attribute);

Split split_attribute_sort(const Corpus& corpus, const SplitSpec& spec);
Split split_diversity_subset(const Corpus& corpus, const SplitSpec& spec);
Split split_attribute_stratified(const Corpus& corpus, const SplitSpec& spec);
Split split_diversity_stratified(const Corpus& corpus, const SplitSpec& spec);
Split split_cluster_stratified(const Corpus& corpus, const SplitSpec& spec);

Split make_split(const Corpus& corpus, const SplitSpec& spec);

// Base-2 Shannon entropy of the party labels in a user's history.
double party_entropy(const Corpus& corpus, const std::string& user);

// `train.csv` and `test.csv` with a `user_id,item_id` header.
void write_split(const std::filesystem::path& dir, const Split& split);
Split read_split(const std::filesystem::path& dir);

}  // namespace nrs
