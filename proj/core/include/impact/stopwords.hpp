#pragma once

#include <array>
#include <span>
#include <string_view>

namespace impact {

/// Fixed English stop list (version 1). The full list is also kept in
/// docs/stopwords_v1.txt.
std::span<const std::string_view> stop_words();
bool is_stop_word(std::string_view token);

}  // namespace impact
