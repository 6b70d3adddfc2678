#include "nrs/io.hpp"

#include "nrs/error.hpp"
#include "nrs/util.hpp"

namespace nrs {

std::string ranked_lists_to_jsonl(const std::vector<RankedList>& lists) {
  std::string out;
  for (const auto& list : lists) {
    nlohmann::ordered_json j;
    j["user_id"] = list.user_id;
    j["items"] = nlohmann::ordered_json::array();
    for (const auto& e : list.entries) {
      j["items"].push_back(nlohmann::ordered_json{{"id", e.id}, {"score", e.score}});
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RankedList> ranked_lists_from_jsonl(std::string_view text, const std::string& source) {
  std::vector<RankedList> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RankedList list;
      list.user_id = j.at("user_id").get<std::string>();
      for (const auto& e : j.at("items")) {
        list.entries.push_back({e.at("id").get<std::string>(), e.at("score").get<double>()});
      }
      out.push_back(std::move(list));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_ranked_lists(const std::filesystem::path& path, const std::vector<RankedList>& lists) {
  write_file(path, ranked_lists_to_jsonl(lists));
}

std::vector<RankedList> read_ranked_lists(const std::filesystem::path& path) {
  return ranked_lists_from_jsonl(read_file(path), path.string());
}

std::string items_to_jsonl(const ItemCatalog& items, const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    auto it = items.find(id);
    if (it == items.end()) continue;
    out += item_to_json(it->second).dump();
    out += '\n';
  }
  return out;
}

}  // namespace nrs
