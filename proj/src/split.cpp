#include "nrs/split.hpp"

#include <array>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "nrs/error.hpp"
#include "nrs/ntd.hpp"
#include "nrs/util.hpp"

namespace nrs {

namespace {

constexpr std::size_t kMaxPcaComponents = 8;
constexpr int kKMeansIterations = 100;

const Item& item_of(const Corpus& corpus, const std::string& id) {
  auto it = corpus.items.find(id);
  if (it == corpus.items.end()) {
    throw ValidationError("split: history references unknown item '" + id + "'");
  }
  return it->second;
}

std::size_t rounded(double x) { return static_cast<std::size_t>(std::llround(x)); }

Split finish(std::vector<UserItem> train, std::vector<UserItem> test) {
  Split s;
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  for (const auto& p : train) s.train_users.insert(p.first);
  for (const auto& p : test) s.test_users.insert(p.first);
  s.train_pairs = std::move(train);
  s.test_pairs = std::move(test);
  return s;
}

// Whole users go to test; the rest to train.
Split user_holdout(const std::vector<UserItem>& pairs, const std::set<std::string>& test_users) {
  std::vector<UserItem> train, test;
  for (const auto& p : pairs) (test_users.contains(p.first) ? test : train).push_back(p);
  return finish(std::move(train), std::move(test));
}

// Picks `quota` test pairs per class. A pair is taken first only when its user
// keeps at least one training pair; a second pass fills any shortfall.
Split stratified_pairs(const std::map<std::string, std::vector<UserItem>>& by_class,
                       std::size_t total_test, std::mt19937_64& rng) {
  std::vector<double> sizes;
  for (const auto& [cls, pairs] : by_class) sizes.push_back(static_cast<double>(pairs.size()));
  const auto quota = apportion(sizes, total_test);

  std::map<std::string, std::size_t> train_left;
  for (const auto& [cls, pairs] : by_class) {
    for (const auto& p : pairs) ++train_left[p.first];
  }
  std::vector<UserItem> train, test;
  std::size_t c = 0;
  for (const auto& [cls, pairs] : by_class) {
    std::vector<UserItem> shuffled = pairs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<bool> taken(shuffled.size(), false);
    std::size_t got = 0;
    for (int pass = 0; pass < 2 && got < quota[c]; ++pass) {
      for (std::size_t k = 0; k < shuffled.size() && got < quota[c]; ++k) {
        if (taken[k]) continue;
        auto& left = train_left[shuffled[k].first];
        if (pass == 0 && left <= 1) continue;
        taken[k] = true;
        --left;
        ++got;
      }
    }
    for (std::size_t k = 0; k < shuffled.size(); ++k) {
      (taken[k] ? test : train).push_back(shuffled[k]);
    }
    ++c;
  }
  return finish(std::move(train), std::move(test));
}

// Users grouped into strata; test users drawn per stratum by largest remainder.
std::set<std::string> stratified_users(const std::vector<std::vector<std::string>>& strata,
                                       double test_fraction, std::mt19937_64& rng) {
  std::vector<double> sizes;
  std::size_t total = 0;
  for (const auto& s : strata) {
    sizes.push_back(static_cast<double>(s.size()));
    total += s.size();
  }
  const auto quota = apportion(sizes, rounded(test_fraction * static_cast<double>(total)));
  std::set<std::string> test;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    auto users = strata[k];
    std::sort(users.begin(), users.end());
    std::shuffle(users.begin(), users.end(), rng);
    for (std::size_t j = 0; j < quota[k] && j < users.size(); ++j) test.insert(users[j]);
  }
  return test;
}

std::map<std::string, std::vector<UserItem>> group_by_class(
    const Corpus& corpus, const std::vector<UserItem>& pairs, const std::string& attribute) {
  std::map<std::string, std::vector<UserItem>> by_class;
  for (const auto& p : pairs) {
    auto cls = attribute_class(item_of(corpus, p.second), attribute);
    by_class[cls.value_or("<none>")].push_back(p);
  }
  return by_class;
}

}  // namespace

std::string_view to_string(SplitMethod m) {
  switch (m) {
    case SplitMethod::AttributeSort: return "attribute_sort";
    case SplitMethod::DiversitySubset: return "diversity_subset";
    case SplitMethod::AttributeStratified: return "attribute_stratified";
    case SplitMethod::DiversityStratified: return "diversity_stratified";
    case SplitMethod::ClusterStratified: return "cluster_stratified";
  }
  return "attribute_stratified";
}

std::optional<SplitMethod> parse_split_method(std::string_view s) {
  for (auto m : {SplitMethod::AttributeSort, SplitMethod::DiversitySubset,
                 SplitMethod::AttributeStratified, SplitMethod::DiversityStratified,
                 SplitMethod::ClusterStratified}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("split: test_fraction must lie in (0, 1)");
  }
  if (method != SplitMethod::ClusterStratified && method != SplitMethod::DiversityStratified &&
      !attribute) {
    throw ValidationError("split: method '" + std::string(to_string(method)) +
                          "' requires an attribute");
  }
  if (method == SplitMethod::ClusterStratified) {
    if (!k_clusters || *k_clusters < 2) {
      throw ValidationError("split: cluster_stratified requires k_clusters >= 2");
    }
  }
  if (method == SplitMethod::DiversitySubset && skew.empty()) {
    throw ValidationError("split: diversity_subset requires a skew");
  }
  if (entropy_bands == 0) throw ValidationError("split: entropy_bands must be >= 1");
}

SplitSpec SplitSpec::from_json(const nlohmann::json& j) {
  SplitSpec s;
  try {
    auto m = parse_split_method(j.at("method").get<std::string>());
    if (!m) throw ValidationError("split: unknown method '" + j["method"].get<std::string>() + "'");
    s.method = *m;
    s.test_fraction = j.value("test_fraction", 0.2);
    if (j.contains("attribute") && !j["attribute"].is_null()) {
      s.attribute = j["attribute"].get<std::string>();
    }
    if (j.contains("skew")) s.skew = j["skew"].get<std::map<std::string, double>>();
    if (j.contains("k_clusters")) s.k_clusters = j["k_clusters"].get<std::size_t>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.descending = j.value("descending", false);
    s.entropy_bands = j.value("entropy_bands", std::size_t{5});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("split: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json SplitSpec::to_json() const {
  nlohmann::json j{{"method", to_string(method)},
                   {"test_fraction", test_fraction},
                   {"seed", seed},
                   {"descending", descending},
                   {"entropy_bands", entropy_bands}};
  if (attribute) j["attribute"] = *attribute;
  if (!skew.empty()) j["skew"] = skew;
  if (k_clusters) j["k_clusters"] = *k_clusters;
  return j;
}

std::vector<UserItem> interaction_pairs(const Corpus& corpus) {
  std::vector<UserItem> pairs;
  for (const auto& [user, events] : corpus.histories) {
    for (const auto& e : events) pairs.emplace_back(user, e.item_id);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::optional<std::string> attribute_class(const Item& item, std::string_view attribute) {
  if (attribute == "party") return std::string(to_string(item.party_label));
  if (attribute == "category") {
    if (item.category.empty()) return std::nullopt;
    return item.category;
  }
  if (attribute == "polarity") {
    if (!item.sentiment) return std::nullopt;
    return *item.sentiment < 0.0 ? "neg" : "pos";
  }
  if (attribute == "sentiment") {
    static const Dimension bins = default_sentiment_bins();
    if (auto c = try_assign_class(item, bins)) return bins.classes[*c].label;
    return std::nullopt;
  }
  if (attribute == "complexity") {
    static const Dimension bins = complexity_bins();
    if (auto c = try_assign_class(item, bins)) return bins.classes[*c].label;
    return std::nullopt;
  }
  if (attribute == "story_cluster") {
    if (!item.story_cluster) return std::nullopt;
    return std::to_string(*item.story_cluster);
  }
  throw ValidationError("split: unknown attribute '" + std::string(attribute) + "'");
}

bool is_orderable_attribute(std::string_view attribute) {
  return attribute == "sentiment" || attribute == "complexity" || attribute == "published_at";
}

std::optional<double> attribute_order_value(const Item& item, std::string_view attribute) {
  if (attribute == "sentiment") return item.sentiment;
  if (attribute == "complexity") return item.complexity;
  if (attribute == "published_at") {
    if (!item.published_at) return std::nullopt;
    return static_cast<double>(*item.published_at);
  }
  throw ValidationError("split: attribute '" + std::string(attribute) + "' has no total order");
}

Split split_attribute_sort(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  if (!is_orderable_attribute(*spec.attribute)) {
    throw ValidationError("split: attribute '" + *spec.attribute + "' has no total order");
  }
  std::map<std::string, std::vector<std::string>> by_user;
  for (const auto& [u, i] : interaction_pairs(corpus)) by_user[u].push_back(i);

  std::vector<UserItem> train, test;
  for (auto& [user, items] : by_user) {
    // Items without a value sort first.
    std::vector<std::pair<double, std::string>> keyed;
    for (const auto& id : items) {
      auto v = attribute_order_value(item_of(corpus, id), *spec.attribute);
      keyed.emplace_back(v.value_or(-std::numeric_limits<double>::infinity()), id);
    }
    std::stable_sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return spec.descending ? a.first > b.first : a.first < b.first;
      return a.second < b.second;
    });
    const std::size_t n = keyed.size();
    const std::size_t n_test =
        std::min(rounded(spec.test_fraction * static_cast<double>(n)), n > 0 ? n - 1 : 0);
    for (std::size_t k = 0; k < n; ++k) {
      (k < n - n_test ? train : test).emplace_back(user, keyed[k].second);
    }
  }
  return finish(std::move(train), std::move(test));
}

Split split_diversity_subset(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  const auto pairs = interaction_pairs(corpus);
  auto by_class = group_by_class(corpus, pairs, *spec.attribute);

  double skew_total = 0.0;
  for (const auto& [cls, w] : spec.skew) {
    if (!by_class.contains(cls)) {
      throw ValidationError("split: skew class '" + cls + "' does not occur in the corpus");
    }
    if (!(w >= 0.0)) throw ValidationError("split: negative skew weight for '" + cls + "'");
    skew_total += w;
  }
  if (std::abs(skew_total - 1.0) > 1e-6) throw ValidationError("split: skew must sum to 1");

  // The largest training set whose class shares can match the skew exactly.
  std::size_t train_size =
      rounded((1.0 - spec.test_fraction) * static_cast<double>(pairs.size()));
  for (const auto& [cls, w] : spec.skew) {
    if (w > 0.0) {
      const double cap = std::floor(static_cast<double>(by_class[cls].size()) / w + 1e-9);
      train_size = std::min(train_size, static_cast<std::size_t>(cap));
    }
  }
  std::vector<double> weights;
  for (const auto& [cls, w] : spec.skew) weights.push_back(w);
  const auto quota = apportion(weights, train_size);

  std::mt19937_64 rng(spec.seed);
  std::vector<UserItem> train, rest;
  std::size_t k = 0;
  std::set<std::string> skewed;
  for (const auto& [cls, w] : spec.skew) {
    skewed.insert(cls);
    auto shuffled = by_class[cls];
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t j = 0; j < shuffled.size(); ++j) {
      (j < quota[k] ? train : rest).push_back(shuffled[j]);
    }
    ++k;
  }
  for (const auto& [cls, ps] : by_class) {
    if (!skewed.contains(cls)) rest.insert(rest.end(), ps.begin(), ps.end());
  }
  std::set<std::string> train_users;
  for (const auto& p : train) train_users.insert(p.first);
  std::vector<UserItem> test;
  std::size_t dropped = 0;
  for (auto& p : rest) {
    if (train_users.contains(p.first)) {
      test.push_back(std::move(p));
    } else {
      ++dropped;
    }
  }
  auto s = finish(std::move(train), std::move(test));
  s.dropped_pairs = dropped;
  return s;
}

Split split_attribute_stratified(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  const auto pairs = interaction_pairs(corpus);
  const auto by_class = group_by_class(corpus, pairs, *spec.attribute);
  std::mt19937_64 rng(spec.seed);
  return stratified_pairs(by_class,
                          rounded(spec.test_fraction * static_cast<double>(pairs.size())), rng);
}

double party_entropy(const Corpus& corpus, const std::string& user) {
  auto it = corpus.histories.find(user);
  if (it == corpus.histories.end() || it->second.empty()) return 0.0;
  std::array<double, kPartyLabelCount> counts{};
  std::set<std::string> seen;
  for (const auto& e : it->second) {
    if (!seen.insert(e.item_id).second) continue;
    counts[static_cast<std::size_t>(item_of(corpus, e.item_id).party_label)] += 1.0;
  }
  const double n = static_cast<double>(seen.size());
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log2(c / n);
  }
  return h;
}

Split split_diversity_stratified(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  const auto pairs = interaction_pairs(corpus);
  std::vector<std::pair<std::string, double>> users;
  for (const auto& [user, events] : corpus.histories) {
    users.emplace_back(user, party_entropy(corpus, user));
  }
  if (users.empty()) return {};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [u, h] : users) {
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  const std::size_t bands = spec.entropy_bands;
  const double width = (hi - lo) / static_cast<double>(bands);
  std::vector<std::vector<std::string>> strata(bands);
  for (const auto& [u, h] : users) {
    std::size_t b = 0;
    if (width > 0.0) b = std::min(bands - 1, static_cast<std::size_t>((h - lo) / width));
    strata[b].push_back(u);
  }
  std::mt19937_64 rng(spec.seed);
  return user_holdout(pairs, stratified_users(strata, spec.test_fraction, rng));
}

namespace {

// Lloyd's algorithm with k-means++ seeding. Ties go to the lowest cluster
// index; an empty cluster is reseeded with the point farthest from its centroid.
std::vector<std::size_t> kmeans(const Eigen::MatrixXd& points, std::size_t k,
                                std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), points.cols());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centers.row(0) = points.row(static_cast<Eigen::Index>(first(rng)));
  std::vector<double> d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j) {
        best = std::min(best, (points.row(static_cast<Eigen::Index>(p)) -
                               centers.row(static_cast<Eigen::Index>(j)))
                                  .squaredNorm());
      }
      d2[p] = best;
      total += best;
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (chosen = 0; chosen + 1 < n && r >= d2[chosen]; ++chosen) r -= d2[chosen];
    } else {
      chosen = first(rng);
    }
    centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(chosen));
  }

  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < kKMeansIterations; ++iter) {
    bool changed = iter == 0;
    for (std::size_t p = 0; p < n; ++p) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (points.row(static_cast<Eigen::Index>(p)) -
                          centers.row(static_cast<Eigen::Index>(c)))
                             .squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[p] != best) changed = true;
      assign[p] = best;
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centers.rows(), centers.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t p = 0; p < n; ++p) {
      sums.row(static_cast<Eigen::Index>(assign[p])) += points.row(static_cast<Eigen::Index>(p));
      ++sizes[assign[p]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(sizes[c]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t p = 0; p < n; ++p) {
        const double d = (points.row(static_cast<Eigen::Index>(p)) -
                          centers.row(static_cast<Eigen::Index>(assign[p])))
                             .squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
      assign[far] = c;
    }
  }
  return assign;
}

}  // namespace

Split split_cluster_stratified(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  const std::string attribute = spec.attribute.value_or("party");
  const auto pairs = interaction_pairs(corpus);

  std::vector<std::string> users;
  std::map<std::string, std::size_t> class_index;
  for (const auto& [u, i] : pairs) {
    if (users.empty() || users.back() != u) users.push_back(u);
    if (auto cls = attribute_class(item_of(corpus, i), attribute)) class_index.emplace(*cls, 0);
  }
  const std::size_t k = *spec.k_clusters;
  if (users.size() < k) {
    throw ValidationError("split: " + std::to_string(users.size()) + " users but k_clusters = " +
                          std::to_string(k));
  }
  std::size_t next = 0;
  for (auto& [cls, idx] : class_index) idx = next++;
  const auto dims = static_cast<Eigen::Index>(std::max<std::size_t>(class_index.size(), 1));

  Eigen::MatrixXd profiles = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(users.size()), dims);
  {
    std::size_t row = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      while (users[row] != pairs[p].first) ++row;
      if (auto cls = attribute_class(item_of(corpus, pairs[p].second), attribute)) {
        profiles(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(class_index[*cls])) +=
            1.0;
      }
    }
    for (Eigen::Index r = 0; r < profiles.rows(); ++r) {
      const double s = profiles.row(r).sum();
      if (s > 0.0) profiles.row(r) /= s;
    }
  }

  // PCA onto the leading components.
  Eigen::MatrixXd centered = profiles.rowwise() - profiles.colwise().mean();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / std::max<double>(1.0, static_cast<double>(users.size()) - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const auto comps =
      static_cast<Eigen::Index>(std::min<std::size_t>(kMaxPcaComponents, static_cast<std::size_t>(dims)));
  Eigen::MatrixXd basis = eig.eigenvectors().rightCols(comps);
  Eigen::MatrixXd projected = centered * basis;

  std::mt19937_64 rng(spec.seed);
  const auto assign = kmeans(projected, k, rng);
  std::vector<std::vector<std::string>> strata(k);
  for (std::size_t u = 0; u < users.size(); ++u) strata[assign[u]].push_back(users[u]);
  return user_holdout(pairs, stratified_users(strata, spec.test_fraction, rng));
}

Split make_split(const Corpus& corpus, const SplitSpec& spec) {
  switch (spec.method) {
    case SplitMethod::AttributeSort: return split_attribute_sort(corpus, spec);
    case SplitMethod::DiversitySubset: return split_diversity_subset(corpus, spec);
    case SplitMethod::AttributeStratified: return split_attribute_stratified(corpus, spec);
    case SplitMethod::DiversityStratified: return split_diversity_stratified(corpus, spec);
    case SplitMethod::ClusterStratified: return split_cluster_stratified(corpus, spec);
  }
  throw ValidationError("split: unknown method");
}

namespace {

std::string pairs_csv(const std::vector<UserItem>& pairs) {
  std::string out = "user_id,item_id\n";
  for (const auto& [u, i] : pairs) {
    out += u;
    out += ',';
    out += i;
    out += '\n';
  }
  return out;
}

std::vector<UserItem> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<UserItem> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || (lineno == 1 && t == "user_id,item_id")) continue;
    auto f = split_fields(t, ',');
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected user_id,item_id");
    }
    out.emplace_back(f[0], f[1]);
  }
  return out;
}

}  // namespace

void write_split(const std::filesystem::path& dir, const Split& split) {
  write_file(dir / "train.csv", pairs_csv(split.train_pairs));
  write_file(dir / "test.csv", pairs_csv(split.test_pairs));
}

Split read_split(const std::filesystem::path& dir) {
  return finish(read_pairs(dir / "train.csv"), read_pairs(dir / "test.csv"));
}

}  // namespace nrs
