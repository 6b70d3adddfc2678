#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace nrs {

// One row of the evaluation table. Absent values are metrics that could not be
// computed (e.g. no user had a history to calibrate against).
struct TableRow {
  std::optional<double> activation;
  std::optional<double> cat_calibration;
  std::optional<double> comp_calibration;
  std::optional<double> fragmentation;
  std::optional<double> alt_voices;
  std::optional<double> representation;
  std::optional<double> cat_gini;
  std::optional<double> sent_gini;
  std::optional<double> party_gini;
  std::optional<double> cat_ild;
  std::optional<double> sent_ild;
  std::optional<double> party_ild;
  std::optional<double> auc;

  std::array<std::optional<double>, 13> values() const {
    return {activation, cat_calibration, comp_calibration, fragmentation, alt_voices,
            representation, cat_gini, sent_gini, party_gini, cat_ild, sent_ild, party_ild,
            auc};
  }
};

inline constexpr std::array<std::string_view, 13> kTableColumns = {
    "Activ.",    "Cat. Calib.", "Comp. Calib.", "Frag.",     "Alt. Voices",
    "Repr.",     "Cat. Gini",   "Sent. Gini",   "Party Gini", "Cat. ILD",
    "Sent. ILD", "Party ILD",   "AUC"};

// `model,reranker,<columns...>`
std::string table_header_csv();
// Values with `precision` decimals; absent values are left empty.
std::string table_row_csv(std::string_view model, std::string_view reranker,
                          const TableRow& row, int precision = 6);

}  // namespace nrs
