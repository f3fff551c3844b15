#include "fex/normalize.hpp"

#include <algorithm>
#include <cctype>

namespace fex {
namespace {

bool upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool keep_fragment(std::string_view s) {
    if (s.size() < 2) return false;
    return !std::all_of(s.begin(), s.end(), [](char c) { return digit(c); });
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string_view> camel_humps(std::string_view segment) {
    std::vector<std::string_view> humps;
    if (segment.empty()) return humps;
    const bool has_lower = std::any_of(segment.begin(), segment.end(), lower);
    if (!has_lower) {
        humps.push_back(segment);
        return humps;
    }
    std::size_t start = 0;
    for (std::size_t i = 1; i < segment.size(); ++i) {
        const char prev = segment[i - 1];
        const char cur = segment[i];
        bool boundary = false;
        if (upper(cur) && (lower(prev) || digit(prev))) boundary = true;
        // Acronym followed by a word: "HTTPServer" splits before 'S'.
        if (upper(cur) && upper(prev) && i + 1 < segment.size() && lower(segment[i + 1]))
            boundary = true;
        if (boundary) {
            humps.push_back(segment.substr(start, i - start));
            start = i;
        }
    }
    humps.push_back(segment.substr(start));
    return humps;
}

std::vector<std::string> normalize(std::string_view token) {
    std::vector<std::string> terms;
    if (token.empty()) return terms;
    terms.push_back(to_lower(token));

    std::vector<std::string_view> segments;
    std::size_t start = 0;
    while (start <= token.size()) {
        std::size_t us = token.find('_', start);
        if (us == std::string_view::npos) us = token.size();
        if (us > start) segments.push_back(token.substr(start, us - start));
        start = us + 1;
    }

    for (auto seg : segments) {
        if (keep_fragment(seg)) terms.push_back(to_lower(seg));
        const auto humps = camel_humps(seg);
        if (humps.size() < 2) continue;
        for (auto h : humps)
            if (keep_fragment(h)) terms.push_back(to_lower(h));
    }

    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

}  // namespace fex
