#include <cstdio>
#include <fstream>
#include <sstream>

#include "fex/project.hpp"
#include "fex/slicer.hpp"

namespace fex {

namespace {

constexpr const char* kMagic = "FEXR";
constexpr int kVersion = 1;

[[noreturn]] void corrupt(std::size_t line, const std::string& what) {
    throw data_error("corrupt slice report: line " + std::to_string(line) + ": " + what);
}

std::string rest_after(const std::string& line, std::string_view key) {
    if (line.size() <= key.size()) return {};
    return line.substr(key.size() + 1);
}

bool starts_with_key(const std::string& line, std::string_view key) {
    return line == key || (line.size() > key.size() && line.compare(0, key.size(), key) == 0 && line[key.size()] == ' ');
}

}  // namespace

std::map<std::string, std::set<int>> SliceReport::line_sets() const {
    std::map<std::string, std::set<int>> out;
    for (const auto& [file, lines] : files)
        for (const auto& [line, origin] : lines) out[file].insert(line);
    return out;
}

std::string format_slice_report(const FeatureSlice& slice, const Provenance& provenance) {
    std::ostringstream out;
    out << kMagic << ' ' << kVersion << '\n';
    out << "terms";
    for (std::size_t i = 0; i < provenance.terms.size(); ++i) out << (i ? ',' : ' ') << provenance.terms[i];
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", provenance.threshold);
    out << "\nthreshold " << buf << '\n';
    out << "ipd-limit " << provenance.ipd_limit << '\n';
    out << "statements " << slice.state.relevant.size() << '\n';
    out << "externals";
    for (const auto& e : slice.state.externals) out << ' ' << e;
    out << '\n';
    for (const auto& [file, origins] : slice.line_origins) {
        out << "file " << origins.size() << ' ' << file << '\n';
        for (const auto& [line, o] : origins) out << line << ' ' << to_string(o.origin) << ' ' << o.depth << '\n';
    }
    out << "end\n";
    return out.str();
}

SliceReport parse_slice_report(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t i = 0;
    auto next = [&](const char* expecting) -> const std::string& {
        if (i >= lines.size()) throw data_error(std::string("truncated slice report: expected ") + expecting);
        return lines[i++];
    };

    SliceReport r;
    {
        std::istringstream head(next("header"));
        std::string magic;
        int version = 0;
        if (!(head >> magic) || magic != kMagic) throw data_error("not a slice report");
        if (!(head >> version) || version != kVersion)
            throw data_error("unsupported slice report version " + std::to_string(version) + " (expected " +
                             std::to_string(kVersion) + ")");
    }
    {
        const std::string& l = next("terms");
        if (!starts_with_key(l, "terms")) corrupt(i, "expected terms");
        std::string terms = rest_after(l, "terms");
        std::istringstream ts(terms);
        for (std::string t; std::getline(ts, t, ',');)
            if (!t.empty()) r.provenance.terms.push_back(t);
    }
    {
        const std::string& l = next("threshold");
        if (!starts_with_key(l, "threshold")) corrupt(i, "expected threshold");
        try {
            r.provenance.threshold = std::stod(rest_after(l, "threshold"));
        } catch (const std::exception&) {
            corrupt(i, "bad threshold");
        }
    }
    {
        const std::string& l = next("ipd-limit");
        if (!starts_with_key(l, "ipd-limit")) corrupt(i, "expected ipd-limit");
        try {
            r.provenance.ipd_limit = std::stoi(rest_after(l, "ipd-limit"));
        } catch (const std::exception&) {
            corrupt(i, "bad ipd-limit");
        }
    }
    if (!starts_with_key(next("statements"), "statements")) corrupt(i, "expected statements");
    {
        const std::string& l = next("externals");
        if (!starts_with_key(l, "externals")) corrupt(i, "expected externals");
        std::istringstream es(rest_after(l, "externals"));
        for (std::string e; es >> e;) r.externals.insert(e);
    }
    while (true) {
        const std::string& l = next("end");
        if (l == "end") break;
        if (!starts_with_key(l, "file")) corrupt(i, "expected file or end");
        std::istringstream fs(rest_after(l, "file"));
        std::size_t n = 0;
        if (!(fs >> n)) corrupt(i, "bad line count");
        std::string path;
        std::getline(fs >> std::ws, path);
        if (path.empty()) corrupt(i, "missing path");
        auto& file = r.files[path];
        for (std::size_t k = 0; k < n; ++k) {
            std::istringstream ls(next("line entry"));
            int line = 0, depth = 0;
            std::string origin;
            if (!(ls >> line >> origin >> depth) || line < 1) corrupt(i, "bad line entry");
            const auto o = parse_origin(origin);
            if (!o) corrupt(i, "unknown origin '" + origin + "'");
            file[line] = {*o, depth};
        }
    }
    return r;
}

void write_slice(const FeatureSlice& slice, const Provenance& provenance, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw data_error("cannot create output directory " + dir.string() + ": " + ec.message());
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out || !(out << text)) throw data_error("cannot write " + p.string());
    };
    for (const auto& [file, text] : slice.rendered) {
        const fs::path target = dir / fs::path(file);
        fs::create_directories(target.parent_path(), ec);
        write(target, text);
    }
    write(dir / "SLICE_REPORT", format_slice_report(slice, provenance));
}

SliceReport read_slice_report(const std::filesystem::path& dir) {
    const auto path = std::filesystem::is_directory(dir) ? dir / "SLICE_REPORT" : dir;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read slice report " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_slice_report(ss.str());
}

}  // namespace fex
