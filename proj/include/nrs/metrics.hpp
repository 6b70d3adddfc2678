#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nrs/corpus.hpp"
#include "nrs/ntd.hpp"
#include "nrs/report.hpp"

namespace nrs {

// Class frequencies over a dimension's full class set. `empty` marks a
// distribution built from nothing; its mass is all zero.
struct Distribution {
  std::vector<double> mass;
  bool empty = false;

  std::size_t size() const { return mass.size(); }
};

Distribution distribution_from_counts(std::span<const double> counts);
// Unclassifiable items are skipped.
Distribution build_distribution(std::span<const Item* const> items, const Dimension& dim);

// Base-2 Jensen-Shannon divergence in [0, 1]. Throws on class-count mismatch
// or an empty operand.
double jsd(const Distribution& p, const Distribution& q);

// Normalized Gini over class mass: sum_i (2i - n - 1) p_(i) / (n - 1) with
// mass sorted ascending. 0 for a single class.
double gini(const Distribution& p);

// Mean pairwise one-hot cosine distance of class labels. nullopt below two items.
std::optional<double> ild(std::span<const std::size_t> classes);
std::optional<double> ild(std::span<const Item* const> items, const Dimension& dim);
// Same, computed from per-class counts only.
std::optional<double> ild_from_counts(std::span<const std::size_t> counts);
// Mean pairwise cosine distance between arbitrary feature vectors.
std::optional<double> ild_vectors(const std::vector<std::vector<double>>& features);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Rank-discounted ILD with weights 1/log2(rank + 1).
std::optional<double> eild(std::span<const std::size_t> classes);
std::optional<double> eild(std::span<const Item* const> items, const Dimension& dim);

using Relevance = std::map<std::string, int, std::less<>>;
using AspectMap = std::map<std::string, std::vector<std::string>, std::less<>>;

// alpha-nDCG over the ranking length; the ideal ordering is built greedily from
// all relevant items. 0 when nothing is relevant.
double alpha_ndcg(std::span<const std::string> ranking, const Relevance& relevance,
                  const AspectMap& aspects, double alpha = 0.5);
double alpha_dcg(std::span<const std::string> ranking, const Relevance& relevance,
                 const AspectMap& aspects, double alpha);

// P(g) = fraction of pool items carrying genre g.
std::map<std::string, double> genre_probabilities(
    std::span<const std::vector<std::string>> pool_genres);

// Binomial diversity = coverage * non-redundancy for a list whose items carry
// the given genre sets. Throws when the genre universe is empty.
double binomial_diversity(std::span<const std::vector<std::string>> list_genres,
                          const std::map<std::string, double>& genre_probability);

struct AucResult {
  double auc = 0.5;
  std::size_t users = 0;
  std::size_t impressions_used = 0;
  std::size_t impressions_skipped = 0;  // no clicked or no unclicked item
  std::size_t missing_scores = 0;       // scored as -infinity
};

using UserScores = std::unordered_map<std::string, double>;
using Predictions = std::map<std::string, UserScores, std::less<>>;

// Pairwise clicked-vs-unclicked AUC per impression, ties count 1/2; averaged
// over impressions of a user, then over users.
AucResult auc(const Predictions& predictions, std::span<const Impression> impressions);
// One impression; nullopt if it lacks clicked or unclicked items.
std::optional<double> impression_auc(const UserScores& scores, const Impression& imp,
                                     std::size_t* missing = nullptr);

enum class FragmentationMode { RecsVsRecs, HistoryVsRecs };

struct EvalOptions {
  std::size_t fragmentation_sample = 10;
  FragmentationMode fragmentation_mode = FragmentationMode::RecsVsRecs;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

// Everything the per-user metrics need, computed once per evaluation.
struct EvalContext {
  const ItemCatalog* items = nullptr;
  const std::map<std::string, std::vector<HistoryEvent>, std::less<>>* histories = nullptr;
  std::vector<std::string> pool;
  Dimension category;
  Dimension sentiment;
  Dimension party;
  Dimension activation;
  Dimension complexity;
  Dimension clusters;
  Distribution pool_activation;
  Distribution pool_party;
  Distribution pool_alt_voices;
  std::map<std::string, double> genre_probability;
  Relevance empty_relevance;
  std::map<std::string, Relevance, std::less<>> clicked;  // user -> clicked items
  AspectMap aspects;

  static EvalContext build(const Corpus& corpus, std::vector<std::string> pool,
                           const NTD& ntd);
};

struct UserMetrics {
  std::optional<double> activation;
  std::optional<double> cat_calibration;
  std::optional<double> comp_calibration;
  std::optional<double> fragmentation;
  std::optional<double> alt_voices;
  std::optional<double> representation;
  std::optional<double> cat_gini, sent_gini, party_gini;
  std::optional<double> cat_ild, sent_ild, party_ild;
  std::optional<double> cat_eild, sent_eild, party_eild;
  std::optional<double> alpha_ndcg;
  std::optional<double> binomial_diversity;
  std::optional<double> auc;
};

using Recommendations = std::map<std::string, std::vector<std::string>, std::less<>>;

struct MetricReport {
  std::map<std::string, UserMetrics, std::less<>> per_user;
  TableRow table;
  std::optional<double> cat_eild, sent_eild, party_eild;
  std::optional<double> alpha_ndcg;
  std::optional<double> binomial_diversity;
  AucResult auc_detail;

  nlohmann::json to_json() const;
};

// Two classes: minority (Other) and majority (Governing, Opposition, Both).
// Items without party mentions are skipped.
Distribution alt_voices_distribution(std::span<const Item* const> items);

// RADio divergences for one user. `others` are the users available for the
// fragmentation sample (the user itself is skipped).
UserMetrics radio_user(const EvalContext& ctx, const std::string& user,
                       std::span<const std::string> recs, const Recommendations& all,
                       std::span<const std::string> others, const EvalOptions& opts);

// Full per-user metric suite plus aggregate means. Parallel over users.
MetricReport evaluate(const EvalContext& ctx, const Recommendations& recs,
                      const Predictions* predictions, std::span<const Impression> impressions,
                      const EvalOptions& opts);
// Single-threaded reference with identical results.
MetricReport evaluate_serial(const EvalContext& ctx, const Recommendations& recs,
                             const Predictions* predictions,
                             std::span<const Impression> impressions, const EvalOptions& opts);

}  // namespace nrs
