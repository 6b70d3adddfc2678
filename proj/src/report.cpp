#include "nrs/report.hpp"

#include <cstdio>

namespace nrs {

std::string table_header_csv() {
  std::string out = "model,reranker";
  for (auto col : kTableColumns) {
    out += ',';
    out += col;
  }
  return out;
}

std::string table_row_csv(std::string_view model, std::string_view reranker,
                          const TableRow& row, int precision) {
  std::string out(model);
  out += ',';
  out += reranker;
  char buf[64];
  for (const auto& v : row.values()) {
    out += ',';
    if (v) {
      std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
      out += buf;
    }
  }
  return out;
}

}  // namespace nrs
