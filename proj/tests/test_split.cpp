#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "nrs/error.hpp"
#include "nrs/split.hpp"
#include "nrs/synthetic.hpp"

using namespace nrs;

namespace {

SplitSpec spec_of(SplitMethod m, std::optional<std::string> attribute, std::uint64_t seed = 1) {
  SplitSpec s;
  s.method = m;
  s.attribute = std::move(attribute);
  s.seed = seed;
  if (m == SplitMethod::ClusterStratified) s.k_clusters = 4;
  if (m == SplitMethod::DiversitySubset) s.skew = {{"governing", 0.5}, {"opposition", 0.5}};
  return s;
}

std::vector<SplitSpec> all_specs(std::uint64_t seed) {
  return {spec_of(SplitMethod::AttributeSort, "sentiment", seed),
          spec_of(SplitMethod::DiversitySubset, "party", seed),
          spec_of(SplitMethod::AttributeStratified, "party", seed),
          spec_of(SplitMethod::DiversityStratified, std::nullopt, seed),
          spec_of(SplitMethod::ClusterStratified, "party", seed)};
}

void add_history(Corpus& c, const std::string& user, const std::vector<std::string>& ids) {
  std::int64_t t = 0;
  for (const auto& id : ids) c.histories[user].push_back({user, id, ++t});
}

}  // namespace

TEST_CASE("attribute sort holds out the top of each user's order") {
  Corpus c;
  std::vector<std::string> ids;
  for (int k = 0; k < 10; ++k) {
    const std::string id = "s" + std::to_string(k);
    c.items.emplace(id, fixtures::item(id, PartyLabel::None, -0.9 + 0.2 * k));
    ids.push_back(id);
  }
  add_history(c, "u", ids);
  const auto s = split_attribute_sort(c, spec_of(SplitMethod::AttributeSort, "sentiment"));
  CHECK(s.test_pairs == std::vector<UserItem>{{"u", "s8"}, {"u", "s9"}});
  CHECK(s.train_pairs.size() == 8);

  // Equal values fall back to item id.
  c.items.at("s8").sentiment = 0.9;
  c.items.at("s9").sentiment = 0.9;
  c.items.at("s7").sentiment = 0.9;
  const auto tied = split_attribute_sort(c, spec_of(SplitMethod::AttributeSort, "sentiment"));
  CHECK(tied.test_pairs == std::vector<UserItem>{{"u", "s8"}, {"u", "s9"}});

  // Every held-out item's value is at least every training item's value.
  const auto synth = make_synthetic({.users = 20});
  const auto ss = split_attribute_sort(synth, spec_of(SplitMethod::AttributeSort, "sentiment"));
  std::map<std::string, double> max_train, min_test;
  for (const auto& [u, i] : ss.train_pairs) {
    max_train[u] = std::max(max_train.count(u) ? max_train[u] : -2.0, *synth.items.at(i).sentiment);
  }
  for (const auto& [u, i] : ss.test_pairs) {
    min_test[u] = std::min(min_test.count(u) ? min_test[u] : 2.0, *synth.items.at(i).sentiment);
  }
  double test_mean = 0, train_mean = 0;
  for (const auto& [u, v] : min_test) CHECK(v >= max_train[u]);
  for (const auto& [u, i] : ss.test_pairs) test_mean += *synth.items.at(i).sentiment;
  for (const auto& [u, i] : ss.train_pairs) train_mean += *synth.items.at(i).sentiment;
  CHECK(test_mean / ss.test_pairs.size() > train_mean / ss.train_pairs.size());

  CHECK_THROWS_AS(split_attribute_sort(c, spec_of(SplitMethod::AttributeSort, "party")), ValidationError);
}

TEST_CASE("diversity subset reproduces the skew in training") {
  const auto synth = make_synthetic({.users = 60});
  auto spec = spec_of(SplitMethod::DiversitySubset, "party");
  spec.skew = {{"governing", 0.9}, {"opposition", 0.1}};
  const auto s = split_diversity_subset(synth, spec);
  std::size_t gov = 0;
  for (const auto& [u, i] : s.train_pairs) {
    if (synth.items.at(i).party_label == PartyLabel::Governing) ++gov;
  }
  const double share = 100.0 * gov / s.train_pairs.size();
  CHECK(std::abs(share - 90.0) <= 1.0);
  for (const auto& [u, i] : s.test_pairs) CHECK(s.train_users.contains(u));

  spec.skew = {{"governing", 0.5}, {"imaginary", 0.5}};
  try {
    split_diversity_subset(synth, spec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("imaginary") != std::string::npos);
  }
}

TEST_CASE("attribute stratified keeps class shares") {
  Corpus c;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < 1000; ++k) {
    const std::string id = "p" + std::to_string(k);
    c.items.emplace(id, fixtures::item(id, static_cast<PartyLabel>(k % 4), 0.0));
    ids.push_back(id);
  }
  for (std::size_t u = 0; u < 50; ++u) {
    add_history(c, "u" + std::to_string(u),
                std::vector<std::string>(ids.begin() + u * 20, ids.begin() + (u + 1) * 20));
  }
  auto spec = spec_of(SplitMethod::AttributeStratified, "party");
  spec.test_fraction = 0.1;
  const auto s = split_attribute_stratified(c, spec);
  CHECK(s.test_pairs.size() == 100);
  std::map<PartyLabel, int> per_class;
  for (const auto& [u, i] : s.test_pairs) ++per_class[c.items.at(i).party_label];
  for (const auto& [label, n] : per_class) CHECK(std::abs(n - 25) <= 1);

  Corpus one;
  for (int k = 0; k < 20; ++k) {
    const std::string id = "q" + std::to_string(k);
    one.items.emplace(id, fixtures::item(id, PartyLabel::Governing, 0.0));
    add_history(one, "u" + std::to_string(k % 4), {id});
  }
  const auto single = split_attribute_stratified(one, spec_of(SplitMethod::AttributeStratified, "party"));
  CHECK(single.test_pairs.size() == 4);
  CHECK(single.train_pairs.size() == 16);
}

TEST_CASE("diversity stratified keeps entropy band shares") {
  const auto synth = make_synthetic({.users = 200, .history_length = 6});
  auto spec = spec_of(SplitMethod::DiversityStratified, std::nullopt);
  spec.test_fraction = 0.3;
  const auto s = split_diversity_stratified(synth, spec);

  double lo = 1e9, hi = -1e9;
  std::map<std::string, double> h;
  for (const auto& [u, ev] : synth.histories) {
    h[u] = party_entropy(synth, u);
    lo = std::min(lo, h[u]);
    hi = std::max(hi, h[u]);
  }
  std::map<std::size_t, std::pair<double, double>> band;  // all users, test users
  for (const auto& [u, e] : h) {
    const auto b = std::min<std::size_t>(4, static_cast<std::size_t>((e - lo) / ((hi - lo) / 5)));
    band[b].first += 1;
    if (s.test_users.contains(u)) band[b].second += 1;
  }
  const double n_test = s.test_users.size();
  for (const auto& [b, counts] : band) {
    CHECK(std::abs(counts.second / n_test - counts.first / h.size()) <= 0.05);
  }
  for (const auto& u : s.test_users) CHECK_FALSE(s.train_users.contains(u));
}

TEST_CASE("cluster stratified samples every cluster") {
  Corpus c;
  for (int k = 0; k < 40; ++k) {
    const std::string g = "g" + std::to_string(k), o = "o" + std::to_string(k);
    c.items.emplace(g, fixtures::item(g, PartyLabel::Governing, 0.0));
    c.items.emplace(o, fixtures::item(o, PartyLabel::Opposition, 0.0));
  }
  for (int u = 0; u < 20; ++u) {
    add_history(c, "a" + std::to_string(u), {"g" + std::to_string(u), "g" + std::to_string(u + 20)});
    add_history(c, "b" + std::to_string(u), {"o" + std::to_string(u), "o" + std::to_string(u + 20)});
  }
  auto spec = spec_of(SplitMethod::ClusterStratified, "party");
  spec.k_clusters = 2;
  spec.test_fraction = 0.2;
  const auto s = split_cluster_stratified(c, spec);
  int a = 0, b = 0;
  for (const auto& u : s.test_users) (u[0] == 'a' ? a : b)++;
  CHECK(a == 4);
  CHECK(b == 4);

  spec.k_clusters = 100;
  CHECK_THROWS_AS(split_cluster_stratified(c, spec), ValidationError);
}

TEST_CASE("every method yields disjoint, seed-determined splits") {
  const auto synth = make_synthetic({.users = 40});
  const auto all = interaction_pairs(synth);
  for (const auto& spec : all_specs(9)) {
    CAPTURE(to_string(spec.method));
    const auto s = make_split(synth, spec);
    std::set<UserItem> train(s.train_pairs.begin(), s.train_pairs.end());
    for (const auto& p : s.test_pairs) CHECK_FALSE(train.contains(p));
    CHECK(s.train_pairs.size() + s.test_pairs.size() + s.dropped_pairs == all.size());
    CHECK_FALSE(s.test_pairs.empty());
    const auto again = make_split(synth, spec);
    CHECK(again.test_pairs == s.test_pairs);
  }
  const auto a = make_split(synth, spec_of(SplitMethod::AttributeStratified, "party", 1));
  const auto b = make_split(synth, spec_of(SplitMethod::AttributeStratified, "party", 2));
  CHECK(a.test_pairs != b.test_pairs);
}

TEST_CASE("split files round-trip") {
  fixtures::TempDir dir("split");
  const auto synth = make_synthetic({.users = 10});
  const auto s = make_split(synth, spec_of(SplitMethod::AttributeStratified, "party"));
  write_split(dir.path(), s);
  const auto back = read_split(dir.path());
  CHECK(back.train_pairs == s.train_pairs);
  CHECK(back.test_pairs == s.test_pairs);
  CHECK(back.test_users == s.test_users);
}

TEST_CASE("split spec json") {
  const auto s = SplitSpec::from_json(nlohmann::json::parse(
      R"({"method":"diversity_subset","attribute":"party","skew":{"governing":1.0},"test_fraction":0.3})"));
  CHECK(s.method == SplitMethod::DiversitySubset);
  CHECK(SplitSpec::from_json(s.to_json()).to_json() == s.to_json());
  CHECK_THROWS_AS(SplitSpec::from_json(nlohmann::json::parse(R"({"method":"x"})")), ValidationError);
  CHECK_THROWS_AS(SplitSpec::from_json(nlohmann::json::parse(R"({"method":"attribute_sort"})")),
                  ValidationError);
}
