#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nrs {

// FNV-1a, used to derive per-user seeds that do not depend on evaluation order.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t user_seed(std::uint64_t seed, std::string_view user_id) {
  return seed ^ fnv1a(user_id);
}

// Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Splits on a single delimiter; keeps empty fields.
std::vector<std::string> split_fields(std::string_view line, char delim);

std::string_view trim(std::string_view s);

}  // namespace nrs
