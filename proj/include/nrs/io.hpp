#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nrs/models.hpp"

namespace nrs {

// One `{"user_id":..., "items":[{"id":..., "score":...}]}` object per line.
std::string ranked_lists_to_jsonl(const std::vector<RankedList>& lists);
std::vector<RankedList> ranked_lists_from_jsonl(std::string_view text,
                                                const std::string& source = "<input>");

void write_ranked_lists(const std::filesystem::path& path, const std::vector<RankedList>& lists);
std::vector<RankedList> read_ranked_lists(const std::filesystem::path& path);

std::string items_to_jsonl(const ItemCatalog& items, const std::vector<std::string>& ids);

}  // namespace nrs
