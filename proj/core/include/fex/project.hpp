#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fex {

struct SourceFile {
    std::string path;  // relative, '/'-separated
    std::string text;

    bool operator==(const SourceFile&) const = default;
};

/// A C project: its .c (and optionally .h) files sorted by relative path.
struct SourceProject {
    std::filesystem::path root;
    std::vector<SourceFile> files;
    bool include_headers = true;

    const SourceFile* find(std::string_view path) const;
};

struct LoadOptions {
    bool include_headers = true;
};

/// Loads every .c/.h file under `root` (or `root` itself when it is a file).
/// Throws a data error for unreadable paths or files that are not UTF-8.
SourceProject load_project(const std::filesystem::path& root, const LoadOptions& options = {});

/// Builds a project from in-memory files (sorted, UTF-8 checked).
SourceProject make_project(std::vector<SourceFile> files, bool include_headers = true);

bool is_header_path(std::string_view path);
bool is_valid_utf8(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Per-file content hash, hex encoded.
std::string content_hash(std::string_view text);

/// Content hash over every (path, text) pair of the project, hex encoded.
std::string project_fingerprint(const SourceProject& project);

/// Splits text into physical lines without their terminators.
std::vector<std::string> split_lines(std::string_view text);

}  // namespace fex
