#pragma once

#include <string>
#include <string_view>

namespace medcot {

/// SHA-256 of the bytes, rendered as 64 lowercase hex characters.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file's contents. Throws Error{Image} on read failure.
std::string sha256_file(const std::string& path);

/// Standard base64 (no line breaks), used for image data URLs.
std::string base64_encode(std::string_view bytes);

}  // namespace medcot
