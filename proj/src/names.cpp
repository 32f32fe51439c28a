// SPDX-License-Identifier: Apache-2.0
#include "vplat/names.hpp"

#include <string_view>

#include "vplat/error.hpp"

namespace vplat {

bool is_valid_feature_name(std::string_view name) {
  if (name.empty() || name == "true" || name == "false") return false;
  for (unsigned char c : name) {
    if (c <= 0x20 || c == 0x7f) return false;
    switch (c) {
      case '[': case ']': case '(': case ')': case ',': case '/':
      case '|': case '&': case '!': case '?':
        return false;
      default:
        break;
    }
  }
  return true;
}

bool is_valid_asset_name(std::string_view name) {
  if (name.empty() || name == "." || name == "..") return false;
  for (unsigned char c : name) {
    if (c < 0x20 || c == 0x7f || c == '/') return false;
  }
  return true;
}

void require_feature_name(std::string_view name) {
  if (!is_valid_feature_name(name)) {
    fail(ErrorCode::InvalidName, "invalid feature name '" + std::string(name) + "'");
  }
}

void require_asset_name(std::string_view name) {
  if (!is_valid_asset_name(name)) {
    fail(ErrorCode::InvalidName, "invalid asset name '" + std::string(name) + "'");
  }
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

}  // namespace vplat
