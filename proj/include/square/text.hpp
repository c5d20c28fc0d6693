#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace square::text {

/// Collapse runs of ASCII whitespace into one space and trim both ends.
std::string collapse_whitespace(std::string_view s);

/// collapse_whitespace followed by ASCII lower-casing. Used by the leakage
/// guard when comparing a target answer with its references.
std::string normalize_for_match(std::string_view s);

/// Split on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);

bool is_blank(std::string_view s);

}  // namespace square::text
