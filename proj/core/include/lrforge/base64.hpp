#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace lrforge::base64 {

// RFC 4648 standard alphabet with '=' padding.
std::string encode(std::string_view bytes);

// Strict decode: rejects non-alphabet characters and bad padding.
std::optional<std::string> decode(std::string_view text);

}  // namespace lrforge::base64
