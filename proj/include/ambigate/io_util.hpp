#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ambigate {

// Reads a whole file into memory. Throws Error("file-io") when the file
// cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes bytes to a file, replacing any previous content. Throws
// Error("file-io") on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

// FNV-1a over raw bytes. Used to fingerprint datasets and generator
// configurations; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

// fnv1a64 rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

// Decimal rendering with 17 significant digits ("%.17g"). Parsing the
// result recovers the exact same double.
std::string format_double_17(double value);

// Shortest decimal rendering that round-trips (std::to_chars).
std::string format_double_shortest(double value);

}  // namespace ambigate
