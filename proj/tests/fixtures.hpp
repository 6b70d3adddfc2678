#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nrs/corpus.hpp"
#include "nrs/util.hpp"

namespace fixtures {

inline nrs::Item item(std::string id, nrs::PartyLabel party, double sentiment,
                      std::string category = "news") {
  nrs::Item it;
  it.item_id = std::move(id);
  it.category = std::move(category);
  it.sentiment = sentiment;
  it.party_label = party;
  return it;
}

// Sentiment value inside bin b of the default four bins.
inline double sentiment_in_bin(std::size_t b) {
  constexpr double mid[] = {-0.75, -0.25, 0.25, 0.75};
  return mid[b];
}

// `per_combo` items for each of the 5 party x 4 sentiment combinations.
inline nrs::ItemCatalog rich_catalog(std::size_t per_combo) {
  nrs::ItemCatalog items;
  std::size_t n = 0;
  for (std::size_t p = 0; p < 5; ++p) {
    for (std::size_t s = 0; s < 4; ++s) {
      for (std::size_t k = 0; k < per_combo; ++k, ++n) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "R%04zu", n);
        items.emplace(buf, item(buf, static_cast<nrs::PartyLabel>(p), sentiment_in_bin(s)));
      }
    }
  }
  return items;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("nrs_" + tag + "_" + std::to_string(rng() % 1000000000));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
