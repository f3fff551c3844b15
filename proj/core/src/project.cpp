#include "fex/project.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fex/error.hpp"

namespace fex {

namespace fs = std::filesystem;

const SourceFile* SourceProject::find(std::string_view path) const {
    auto it = std::lower_bound(files.begin(), files.end(), path,
                               [](const SourceFile& f, std::string_view p) { return f.path < p; });
    if (it != files.end() && it->path == path) return &*it;
    return nullptr;
}

bool is_header_path(std::string_view path) {
    return path.size() >= 2 && (path.ends_with(".h") || path.ends_with(".H"));
}

namespace {

bool is_source_path(std::string_view path) {
    return path.ends_with(".c") || path.ends_with(".C") || is_header_path(path);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw data_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            extra = 3;
        } else {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= text.size()) return false;
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

SourceProject make_project(std::vector<SourceFile> files, bool include_headers) {
    SourceProject project;
    project.include_headers = include_headers;
    for (auto& f : files) {
        if (!include_headers && is_header_path(f.path)) continue;
        if (!is_valid_utf8(f.text)) throw data_error(f.path + ": file is not valid UTF-8");
        project.files.push_back(std::move(f));
    }
    std::sort(project.files.begin(), project.files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    return project;
}

SourceProject load_project(const fs::path& root, const LoadOptions& options) {
    std::error_code ec;
    if (!fs::exists(root, ec)) throw data_error("project path does not exist: " + root.string());

    std::vector<SourceFile> files;
    fs::path base = root;
    if (fs::is_regular_file(root, ec)) {
        base = root.parent_path();
        files.push_back({root.filename().generic_string(), read_file(root)});
    } else {
        auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
        if (ec) throw data_error("cannot read " + root.string() + ": " + ec.message());
        for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
            if (ec) throw data_error("cannot read " + root.string() + ": " + ec.message());
            const auto name = it->path().filename().string();
            if (it->is_directory() && !name.empty() && name[0] == '.') {
                it.disable_recursion_pending();
                continue;
            }
            if (!it->is_regular_file()) continue;
            const std::string rel = fs::relative(it->path(), root).generic_string();
            if (!is_source_path(rel)) continue;
            files.push_back({rel, read_file(it->path())});
        }
    }
    SourceProject project = make_project(std::move(files), options.include_headers);
    project.root = base;
    return project;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string content_hash(std::string_view text) { return hex64(fnv1a64(text)); }

std::string project_fingerprint(const SourceProject& project) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& f : project.files) {
        h = fnv1a64(f.path, h);
        h = fnv1a64(std::string_view("\0", 1), h);
        h = fnv1a64(f.text, h);
        h = fnv1a64(std::string_view("\0", 1), h);
    }
    return hex64(h);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        std::string line(text.substr(start, nl - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = nl + 1;
    }
    return lines;
}

}  // namespace fex
