#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace mqmspan::text {

/// Decodes UTF-8 into Unicode scalar values. Ill-formed sequences become U+FFFD.
std::u32string decode(std::string_view utf8);

std::string encode(std::u32string_view scalars);

/// Length in Unicode scalar values.
std::size_t length(std::string_view utf8);

bool is_alnum(char32_t c);
bool is_punct(char32_t c);
bool is_space(char32_t c);

}  // namespace mqmspan::text
