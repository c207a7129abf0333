#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace msle {

/// Shortest-safe decimal form with 17 significant digits.
std::string fmt17(double x);

/// 64-bit FNV-1a; used for content-addressed artifact names.
std::uint64_t fnv1a(std::string_view data);
std::string hex16(std::uint64_t h);

/// Writes `content` to `path`, creating parent directories. Throws DomainError
/// when the file cannot be written.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace msle
