#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dimabsa {

// Input/format problems the operator can fix (bad records, bad flags). CLI exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// External-service or I/O failures surfaced after retries. CLI exit code 2.
struct EndpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trims ASCII whitespace plus U+00A0 and U+3000 (common in Chinese review text)
// from both ends of a UTF-8 string.
std::string_view trim(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Number of non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// Scores render with exactly two decimals ("7.50").
std::string format_two_decimals(double v);

std::string read_text_file(const std::filesystem::path& path);

// Write-then-rename so concurrent readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

} // namespace dimabsa
