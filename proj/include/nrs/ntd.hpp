#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrs/corpus.hpp"
#include "nrs/report.hpp"

namespace nrs {

enum class DimensionKind {
  PartyBucket,
  SentimentBin,
  SentimentMagnitudeBin,  // |sentiment|, used by activation
  Category,
  ComplexityBin,
  StoryCluster,
};

std::string_view to_string(DimensionKind kind);
std::optional<DimensionKind> parse_dimension_kind(std::string_view s);

struct DimensionClass {
  std::string label;
  // Interval kinds: [lo, hi), last class [lo, hi].
  double lo = 0.0;
  double hi = 0.0;
  PartyLabel party = PartyLabel::None;
  std::string category;
  std::int64_t cluster = 0;
};

// An attribute partitioned into an ordered list of classes.
struct Dimension {
  std::string name;
  DimensionKind kind = DimensionKind::Category;
  std::vector<DimensionClass> classes;

  std::size_t size() const { return classes.size(); }
  bool is_interval() const {
    return kind == DimensionKind::SentimentBin || kind == DimensionKind::SentimentMagnitudeBin ||
           kind == DimensionKind::ComplexityBin;
  }

  // Throws ValidationError when classes are empty or intervals overlap/gap.
  void validate() const;

  static Dimension party_buckets(std::string name = "party");
  // Consecutive edges e0 < e1 < ... < ek give k classes.
  static Dimension intervals(std::string name, DimensionKind kind,
                             const std::vector<double>& edges);
  static Dimension categories(std::string name, const std::vector<std::string>& names);
  static Dimension story_clusters(std::string name, const std::vector<std::int64_t>& ids);

  nlohmann::json classes_json() const;
  static Dimension from_json(const nlohmann::json& j);
};

// Default four-way sentiment split: [-1,-0.5) [-0.5,0) [0,0.5) [0.5,1].
Dimension default_sentiment_bins(std::string name = "sentiment");
// |sentiment| in four equal bins over [0, 1].
Dimension activation_bins();
// Width-10 bins over [0, 100]; larger scores fall in the last bin.
Dimension complexity_bins();

// nullopt when the item lacks the attribute or no class matches.
std::optional<std::size_t> try_assign_class(const Item& item, const Dimension& dim);
// Throws ValidationError naming the item and dimension on failure.
std::size_t assign_class(const Item& item, const Dimension& dim);

struct TargetDimension {
  Dimension dimension;
  std::vector<double> proportions;
  double weight = 1.0;
};

struct NTD {
  std::vector<TargetDimension> dimensions;

  void validate() const;
  const TargetDimension* find(DimensionKind kind) const;

  static NTD from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Party 15/15/15/15/40 (governing, opposition, both, other, none) and
// sentiment 20/30/30/20, equal weights.
NTD default_ntd();

struct QuotaPlan {
  std::size_t list_size = 0;
  std::vector<std::vector<std::size_t>> per_dimension;
};

// Largest-remainder apportionment of n seats; ties go to the lower index.
std::vector<std::size_t> apportion(std::span<const double> proportions, std::size_t n);

QuotaPlan quotas(const NTD& ntd, std::size_t list_size);

// Divergence targets have no closed form and are configuration.
struct NtvTargets {
  double activation = 1.0;
  double cat_calibration = 0.0;
  double comp_calibration = 0.0;
  double fragmentation = 0.0;
  double alt_voices = 0.0;
  double representation = 1.0;
  double auc = 1.0;
};

// Best achievable table row for a list of `list_size` items matching the NTD.
// Dimensions the NTD does not cover report ideal bounds (Gini 0, ILD 1).
TableRow ntv(const NTD& ntd, std::size_t list_size, const NtvTargets& targets = {});

}  // namespace nrs
