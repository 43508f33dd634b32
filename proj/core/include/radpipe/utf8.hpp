#pragma once

#include <string>
#include <string_view>

namespace radpipe {

/// Decodes UTF-8 into Unicode scalar values. All pipeline indexing is in
/// characters (scalar values), never bytes. Throws std::runtime_error on
/// malformed input; `where` names the source (file, CLI flag) in the message.
std::u32string utf8_decode(std::string_view bytes, std::string_view where = {});

std::string utf8_encode(std::u32string_view chars);
std::string utf8_encode(char32_t c);

}  // namespace radpipe
