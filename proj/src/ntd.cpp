#include "nrs/ntd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nrs/error.hpp"
#include "nrs/metrics.hpp"

namespace nrs {

namespace {

std::string format_interval(double lo, double hi, bool closed) {
  std::ostringstream ss;
  ss << "[" << lo << "," << hi << (closed ? "]" : ")");
  return ss.str();
}

std::optional<double> attribute_value(const Item& item, DimensionKind kind) {
  switch (kind) {
    case DimensionKind::SentimentBin: return item.sentiment;
    case DimensionKind::SentimentMagnitudeBin:
      if (!item.sentiment) return std::nullopt;
      return std::abs(*item.sentiment);
    case DimensionKind::ComplexityBin: return item.complexity;
    default: return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::PartyBucket: return "party_bucket";
    case DimensionKind::SentimentBin: return "sentiment_bin";
    case DimensionKind::SentimentMagnitudeBin: return "sentiment_magnitude_bin";
    case DimensionKind::Category: return "category";
    case DimensionKind::ComplexityBin: return "complexity_bin";
    case DimensionKind::StoryCluster: return "story_cluster";
  }
  return "category";
}

std::optional<DimensionKind> parse_dimension_kind(std::string_view s) {
  for (auto k : {DimensionKind::PartyBucket, DimensionKind::SentimentBin,
                 DimensionKind::SentimentMagnitudeBin, DimensionKind::Category,
                 DimensionKind::ComplexityBin, DimensionKind::StoryCluster}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

void Dimension::validate() const {
  if (classes.empty()) throw ValidationError("dimension '" + name + "' has no classes");
  if (is_interval()) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (!(classes[c].lo < classes[c].hi)) {
        throw ValidationError("dimension '" + name + "': empty interval " +
                              format_interval(classes[c].lo, classes[c].hi, false));
      }
      if (c > 0 && classes[c].lo != classes[c - 1].hi) {
        throw ValidationError("dimension '" + name +
                              "': intervals must be contiguous and non-overlapping");
      }
    }
  } else {
    std::vector<std::string> labels;
    for (const auto& cls : classes) labels.push_back(cls.label);
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
      throw ValidationError("dimension '" + name + "' has duplicate classes");
    }
  }
}

Dimension Dimension::party_buckets(std::string name) {
  Dimension d{std::move(name), DimensionKind::PartyBucket, {}};
  for (std::size_t i = 0; i < kPartyLabelCount; ++i) {
    DimensionClass cls;
    cls.party = static_cast<PartyLabel>(i);
    cls.label = std::string(to_string(cls.party));
    d.classes.push_back(cls);
  }
  return d;
}

Dimension Dimension::intervals(std::string name, DimensionKind kind,
                               const std::vector<double>& edges) {
  Dimension d{std::move(name), kind, {}};
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    DimensionClass cls;
    cls.lo = edges[k];
    cls.hi = edges[k + 1];
    cls.label = format_interval(cls.lo, cls.hi, k + 2 == edges.size());
    d.classes.push_back(cls);
  }
  d.validate();
  return d;
}

Dimension Dimension::categories(std::string name, const std::vector<std::string>& names) {
  Dimension d{std::move(name), DimensionKind::Category, {}};
  for (const auto& n : names) {
    DimensionClass cls;
    cls.label = n;
    cls.category = n;
    d.classes.push_back(cls);
  }
  return d;
}

Dimension Dimension::story_clusters(std::string name, const std::vector<std::int64_t>& ids) {
  Dimension d{std::move(name), DimensionKind::StoryCluster, {}};
  for (auto id : ids) {
    DimensionClass cls;
    cls.label = std::to_string(id);
    cls.cluster = id;
    d.classes.push_back(cls);
  }
  return d;
}

nlohmann::json Dimension::classes_json() const {
  auto out = nlohmann::json::array();
  for (const auto& cls : classes) {
    switch (kind) {
      case DimensionKind::SentimentBin:
      case DimensionKind::SentimentMagnitudeBin:
      case DimensionKind::ComplexityBin: out.push_back({cls.lo, cls.hi}); break;
      case DimensionKind::StoryCluster: out.push_back(cls.cluster); break;
      default: out.push_back(cls.label); break;
    }
  }
  return out;
}

Dimension Dimension::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("dimension must be a JSON object");
  Dimension d;
  d.name = j.value("name", std::string());
  if (d.name.empty()) throw ValidationError("dimension is missing 'name'");
  auto kind = parse_dimension_kind(j.value("kind", std::string()));
  if (!kind) throw ValidationError("dimension '" + d.name + "': unknown kind");
  d.kind = *kind;

  const bool has_classes = j.contains("classes") && !j["classes"].is_null();
  if (d.kind == DimensionKind::PartyBucket && !has_classes) {
    return party_buckets(d.name);
  }
  if (!has_classes || !j["classes"].is_array()) {
    throw ValidationError("dimension '" + d.name + "': 'classes' must be an array");
  }
  const auto& cj = j["classes"];
  try {
    if (d.is_interval()) {
      for (std::size_t k = 0; k < cj.size(); ++k) {
        DimensionClass cls;
        const auto& c = cj[k];
        if (c.is_array() && c.size() == 2) {
          cls.lo = c[0].get<double>();
          cls.hi = c[1].get<double>();
        } else if (c.is_object()) {
          cls.lo = c.at("lo").get<double>();
          cls.hi = c.at("hi").get<double>();
        } else {
          throw ValidationError("dimension '" + d.name + "': interval classes are [lo, hi]");
        }
        cls.label = format_interval(cls.lo, cls.hi, k + 1 == cj.size());
        if (c.is_object() && c.contains("label")) cls.label = c["label"].get<std::string>();
        d.classes.push_back(cls);
      }
    } else {
      for (const auto& c : cj) {
        DimensionClass cls;
        switch (d.kind) {
          case DimensionKind::PartyBucket: {
            auto label = parse_party_label(c.get<std::string>());
            if (!label) {
              throw ValidationError("dimension '" + d.name + "': unknown party bucket '" +
                                    c.get<std::string>() + "'");
            }
            cls.party = *label;
            cls.label = std::string(to_string(*label));
            break;
          }
          case DimensionKind::StoryCluster:
            cls.cluster = c.get<std::int64_t>();
            cls.label = std::to_string(cls.cluster);
            break;
          default:
            cls.category = c.get<std::string>();
            cls.label = cls.category;
            break;
        }
        d.classes.push_back(cls);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("dimension '" + d.name + "': " + e.what());
  }
  d.validate();
  return d;
}

Dimension default_sentiment_bins(std::string name) {
  return Dimension::intervals(std::move(name), DimensionKind::SentimentBin,
                              {-1.0, -0.5, 0.0, 0.5, 1.0});
}

Dimension activation_bins() {
  return Dimension::intervals("activation", DimensionKind::SentimentMagnitudeBin,
                              {0.0, 0.25, 0.5, 0.75, 1.0});
}

Dimension complexity_bins() {
  std::vector<double> edges;
  for (int e = 0; e <= 100; e += 10) edges.push_back(e);
  return Dimension::intervals("complexity", DimensionKind::ComplexityBin, edges);
}

std::optional<std::size_t> try_assign_class(const Item& item, const Dimension& dim) {
  const auto n = dim.classes.size();
  switch (dim.kind) {
    case DimensionKind::PartyBucket:
      for (std::size_t c = 0; c < n; ++c) {
        if (dim.classes[c].party == item.party_label) return c;
      }
      return std::nullopt;
    case DimensionKind::Category:
      if (item.category.empty()) return std::nullopt;
      for (std::size_t c = 0; c < n; ++c) {
        if (dim.classes[c].category == item.category) return c;
      }
      return std::nullopt;
    case DimensionKind::StoryCluster:
      if (!item.story_cluster) return std::nullopt;
      for (std::size_t c = 0; c < n; ++c) {
        if (dim.classes[c].cluster == *item.story_cluster) return c;
      }
      return std::nullopt;
    default: break;
  }
  auto v = attribute_value(item, dim.kind);
  if (!v || n == 0) return std::nullopt;
  for (std::size_t c = 0; c < n; ++c) {
    const auto& cls = dim.classes[c];
    if (*v >= cls.lo && *v < cls.hi) return c;
  }
  if (*v == dim.classes.back().hi) return n - 1;
  // Complexity is open-ended above; clamp into the last bin.
  if (dim.kind == DimensionKind::ComplexityBin && *v > dim.classes.back().hi) return n - 1;
  return std::nullopt;
}

std::size_t assign_class(const Item& item, const Dimension& dim) {
  auto c = try_assign_class(item, dim);
  if (!c) {
    throw ValidationError("item '" + item.item_id + "' is not classifiable on dimension '" +
                          dim.name + "'");
  }
  return *c;
}

void NTD::validate() const {
  for (const auto& t : dimensions) {
    t.dimension.validate();
    if (t.proportions.size() != t.dimension.size()) {
      throw ValidationError("NTD dimension '" + t.dimension.name +
                            "': proportions length does not match class count");
    }
    double sum = 0.0;
    for (double p : t.proportions) {
      if (!(p >= 0.0)) {
        throw ValidationError("NTD dimension '" + t.dimension.name + "': negative proportion");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("NTD dimension '" + t.dimension.name +
                            "': proportions must sum to 1");
    }
    if (!(t.weight > 0.0)) {
      throw ValidationError("NTD dimension '" + t.dimension.name + "': weight must be > 0");
    }
  }
}

const TargetDimension* NTD::find(DimensionKind kind) const {
  for (const auto& t : dimensions) {
    if (t.dimension.kind == kind) return &t;
  }
  return nullptr;
}

NTD NTD::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dimensions") || !j["dimensions"].is_array()) {
    throw ValidationError("NTD must be an object with a 'dimensions' array");
  }
  NTD ntd;
  for (const auto& dj : j["dimensions"]) {
    TargetDimension t;
    t.dimension = Dimension::from_json(dj);
    try {
      t.proportions = dj.at("proportions").get<std::vector<double>>();
      t.weight = dj.value("weight", 1.0);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("NTD dimension '" + t.dimension.name + "': " + e.what());
    }
    ntd.dimensions.push_back(std::move(t));
  }
  ntd.validate();
  return ntd;
}

nlohmann::json NTD::to_json() const {
  auto dims = nlohmann::json::array();
  for (const auto& t : dimensions) {
    dims.push_back({{"name", t.dimension.name},
                    {"kind", to_string(t.dimension.kind)},
                    {"classes", t.dimension.classes_json()},
                    {"proportions", t.proportions},
                    {"weight", t.weight}});
  }
  return {{"dimensions", dims}};
}

NTD default_ntd() {
  NTD ntd;
  ntd.dimensions.push_back({Dimension::party_buckets("party"), {0.15, 0.15, 0.15, 0.15, 0.40}, 1.0});
  ntd.dimensions.push_back({default_sentiment_bins("sentiment"), {0.2, 0.3, 0.3, 0.2}, 1.0});
  return ntd;
}

std::vector<std::size_t> apportion(std::span<const double> proportions, std::size_t n) {
  constexpr double kEps = 1e-9;
  const double total = std::accumulate(proportions.begin(), proportions.end(), 0.0);
  std::vector<std::size_t> seats(proportions.size(), 0);
  if (proportions.empty() || total <= 0.0) return seats;
  std::vector<double> remainder(proportions.size());
  std::size_t assigned = 0;
  for (std::size_t b = 0; b < proportions.size(); ++b) {
    const double exact = static_cast<double>(n) * proportions[b] / total;
    const double whole = std::floor(exact + kEps);
    seats[b] = static_cast<std::size_t>(whole);
    remainder[b] = std::max(0.0, exact - whole);
    assigned += seats[b];
  }
  std::vector<std::size_t> order(proportions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(remainder[a] - remainder[b]) > kEps) return remainder[a] > remainder[b];
    return a < b;
  });
  for (std::size_t k = 0; assigned < n && k < order.size(); ++k, ++assigned) {
    ++seats[order[k]];
  }
  return seats;
}

QuotaPlan quotas(const NTD& ntd, std::size_t list_size) {
  QuotaPlan plan;
  plan.list_size = list_size;
  for (const auto& t : ntd.dimensions) {
    plan.per_dimension.push_back(apportion(t.proportions, list_size));
  }
  return plan;
}

TableRow ntv(const NTD& ntd, std::size_t list_size, const NtvTargets& targets) {
  TableRow row;
  row.activation = targets.activation;
  row.cat_calibration = targets.cat_calibration;
  row.comp_calibration = targets.comp_calibration;
  row.fragmentation = targets.fragmentation;
  row.alt_voices = targets.alt_voices;
  row.representation = targets.representation;
  row.auc = targets.auc;
  row.cat_gini = row.sent_gini = row.party_gini = 0.0;
  row.cat_ild = row.sent_ild = row.party_ild = 1.0;

  const auto plan = quotas(ntd, list_size);
  for (std::size_t d = 0; d < ntd.dimensions.size(); ++d) {
    const auto& counts = plan.per_dimension[d];
    std::vector<double> as_real(counts.begin(), counts.end());
    const double g = gini(distribution_from_counts(as_real));
    const auto l = ild_from_counts(counts);
    switch (ntd.dimensions[d].dimension.kind) {
      case DimensionKind::PartyBucket:
        row.party_gini = g;
        row.party_ild = l;
        break;
      case DimensionKind::SentimentBin:
        row.sent_gini = g;
        row.sent_ild = l;
        break;
      case DimensionKind::Category:
        row.cat_gini = g;
        row.cat_ild = l;
        break;
      default: break;
    }
  }
  return row;
}

}  // namespace nrs
