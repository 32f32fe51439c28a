// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vplat {

// Feature names: no whitespace, brackets, separators or formula operators,
// and not one of the formula constants.
bool is_valid_feature_name(std::string_view name);

// Asset names: non-empty, no '/', no control characters, not "." or "..".
bool is_valid_asset_name(std::string_view name);

void require_feature_name(std::string_view name);
void require_asset_name(std::string_view name);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string_view trim(std::string_view text);

}  // namespace vplat
