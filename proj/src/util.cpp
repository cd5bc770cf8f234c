#include "dimabsa/util.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dimabsa {

namespace {

// Returns the byte length of a whitespace code point starting at s[i], or 0.
std::size_t whitespace_len_at(std::string_view s, std::size_t i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return 1;
    // U+00A0 no-break space: C2 A0
    if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0) return 2;
    // U+3000 ideographic space: E3 80 80
    if (c == 0xE3 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x80)
        return 3;
    return 0;
}

} // namespace

std::string_view trim(std::string_view s) {
    std::size_t begin = 0;
    while (begin < s.size()) {
        std::size_t len = whitespace_len_at(s, begin);
        if (len == 0) break;
        begin += len;
    }
    std::size_t end = s.size();
    while (end > begin) {
        // Walk back over a trailing whitespace code point (1, 2 or 3 bytes).
        bool stripped = false;
        for (std::size_t len = 1; len <= 3 && len <= end - begin; ++len) {
            if (whitespace_len_at(s, end - len) == len) {
                end -= len;
                stripped = true;
                break;
            }
        }
        if (!stripped) break;
    }
    return s.substr(begin, end - begin);
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    if (from.empty()) return s;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

std::string format_two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw EndpointError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw EndpointError("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace dimabsa
