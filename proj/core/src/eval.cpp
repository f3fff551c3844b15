#include "fex/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fex/lexer.hpp"

namespace fex {

std::size_t line_total(const LineSets& sets) {
    std::size_t n = 0;
    for (const auto& [file, lines] : sets) n += lines.size();
    return n;
}

LineSets TruthModule::line_sets() const {
    LineSets out;
    for (const auto& [file, spans] : ranges)
        for (const auto& s : spans)
            for (int l = s.first; l <= s.last; ++l) out[file].insert(l);
    return out;
}

const TruthModule* GroundTruthManifest::find(std::string_view name) const {
    for (const auto& m : modules)
        if (m.name == name) return &m;
    return nullptr;
}

// ---- manifest --------------------------------------------------------------

namespace {

[[noreturn]] void bad_manifest(std::size_t line, const std::string& what) {
    throw data_error("corrupt manifest: line " + std::to_string(line) + ": " + what);
}

std::pair<std::string, std::string> split_key(const std::string& line) {
    const auto sp = line.find(' ');
    if (sp == std::string::npos) return {line, {}};
    return {line.substr(0, sp), line.substr(sp + 1)};
}

void check_ranges(const TruthModule& m, std::size_t line_no) {
    for (const auto& [file, spans] : m.ranges)
        for (std::size_t i = 1; i < spans.size(); ++i)
            if (spans[i].first <= spans[i - 1].last)
                bad_manifest(line_no, "overlapping ranges for " + file + " in module " + m.name);
}

}  // namespace

GroundTruthManifest parse_manifest(std::string_view text) {
    const auto lines = split_lines(text);
    GroundTruthManifest manifest;
    if (lines.empty() || lines[0].rfind("FEXM", 0) != 0) throw data_error("not a manifest file");
    if (lines[0] != "FEXM 1") throw data_error("unsupported manifest version: " + lines[0] + " (expected FEXM 1)");

    TruthModule* current = nullptr;
    bool ended = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t no = i + 1;
        const std::string& raw = lines[i];
        if (raw.empty() || raw[0] == '#') continue;
        if (ended) bad_manifest(no, "content after end");
        auto [key, rest] = split_key(raw);
        if (key == "fingerprint") {
            manifest.fingerprint = rest == "-" ? "" : rest;
        } else if (key == "module") {
            if (current) bad_manifest(no, "module inside module");
            if (rest.empty()) bad_manifest(no, "module needs a name");
            if (manifest.find(rest)) bad_manifest(no, "duplicate module " + rest);
            manifest.modules.push_back({});
            current = &manifest.modules.back();
            current->name = rest;
        } else if (key == "terms") {
            if (!current) bad_manifest(no, "terms outside module");
            std::istringstream ts(rest);
            for (std::string t; std::getline(ts, t, ',');)
                if (!t.empty()) current->terms.push_back(t);
        } else if (key == "note") {
            if (!current) bad_manifest(no, "note outside module");
            current->notes.push_back(rest);
        } else if (key == "range") {
            if (!current) bad_manifest(no, "range outside module");
            auto [span, path] = split_key(rest);
            int a = 0, b = 0;
            char dash = 0;
            std::istringstream ss(span);
            if (!(ss >> a)) bad_manifest(no, "bad range '" + span + "'");
            if (ss >> dash) {
                if (dash != '-' || !(ss >> b)) bad_manifest(no, "bad range '" + span + "'");
            } else {
                b = a;
            }
            if (a < 1 || b < a) bad_manifest(no, "bad range '" + span + "'");
            if (path.empty()) bad_manifest(no, "range needs a path");
            current->ranges[path].push_back({a, b});
        } else if (key == "end-module") {
            if (!current) bad_manifest(no, "end-module outside module");
            for (auto& [file, spans] : current->ranges)
                std::sort(spans.begin(), spans.end(), [](const LineSpan& x, const LineSpan& y) { return x.first < y.first; });
            check_ranges(*current, no);
            current = nullptr;
        } else if (key == "end") {
            if (current) bad_manifest(no, "end inside module " + current->name);
            ended = true;
        } else {
            bad_manifest(no, "unknown key '" + key + "'");
        }
    }
    if (!ended) throw data_error("truncated manifest: missing end");
    return manifest;
}

std::string format_manifest(const GroundTruthManifest& manifest) {
    std::ostringstream out;
    out << "FEXM 1\nfingerprint " << (manifest.fingerprint.empty() ? "-" : manifest.fingerprint) << '\n';
    for (const auto& m : manifest.modules) {
        out << "module " << m.name << '\n';
        if (!m.terms.empty()) {
            out << "terms ";
            for (std::size_t i = 0; i < m.terms.size(); ++i) out << (i ? "," : "") << m.terms[i];
            out << '\n';
        }
        for (const auto& n : m.notes) out << "note " << n << '\n';
        for (const auto& [file, spans] : m.ranges)
            for (const auto& s : spans) out << "range " << s.first << '-' << s.last << ' ' << file << '\n';
        out << "end-module\n";
    }
    out << "end\n";
    return out.str();
}

GroundTruthManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read manifest " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

// ---- metrics ---------------------------------------------------------------

const char* to_string(Tool t) { return t == Tool::fex ? "fex" : "grep"; }

double precision_of(std::size_t correct, std::size_t additional) {
    const std::size_t d = correct + additional;
    return d == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(d);
}

double recall_of(std::size_t correct, std::size_t missing) {
    const std::size_t d = correct + missing;
    return d == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(d);
}

LineSets code_lines_only(const LineSets& sets, const SourceProject& project) {
    LineSets out;
    for (const auto& [file, lines] : sets) {
        const SourceFile* f = project.find(file);
        if (!f) continue;
        const auto classes = lex::classify_lines(f->text);
        for (int l : lines) {
            if (l < 1 || l > static_cast<int>(classes.size())) continue;
            const auto& c = classes[static_cast<std::size_t>(l - 1)];
            if (!c.blank && !c.comment_only) out[file].insert(l);
        }
    }
    for (auto it = out.begin(); it != out.end();) it = it->second.empty() ? out.erase(it) : std::next(it);
    return out;
}

EvalReport evaluate(const LineSets& slice, const TruthModule& truth, const SourceProject& project, Tool tool) {
    const LineSets s = code_lines_only(slice, project);
    const LineSets t = code_lines_only(truth.line_sets(), project);
    EvalReport r;
    r.module = truth.name;
    r.tool = tool;
    std::set<std::string> files;
    for (const auto& [f, l] : s) files.insert(f);
    for (const auto& [f, l] : t) files.insert(f);
    static const std::set<int> none;
    for (const auto& f : files) {
        const auto& sl = s.count(f) ? s.at(f) : none;
        const auto& tl = t.count(f) ? t.at(f) : none;
        std::set<int> both, miss, extra;
        std::set_intersection(sl.begin(), sl.end(), tl.begin(), tl.end(), std::inserter(both, both.end()));
        std::set_difference(tl.begin(), tl.end(), sl.begin(), sl.end(), std::inserter(miss, miss.end()));
        std::set_difference(sl.begin(), sl.end(), tl.begin(), tl.end(), std::inserter(extra, extra.end()));
        if (!both.empty()) r.correct[f] = std::move(both);
        if (!miss.empty()) r.missing[f] = std::move(miss);
        if (!extra.empty()) r.additional[f] = std::move(extra);
    }
    const std::size_t c = line_total(r.correct);
    r.precision = precision_of(c, line_total(r.additional));
    r.recall = recall_of(c, line_total(r.missing));
    return r;
}

EvalReport evaluate(const LineSets& slice, const GroundTruthManifest& manifest, std::string_view module,
                    const SourceProject& project, Tool tool) {
    if (!manifest.fingerprint.empty()) {
        const std::string actual = project_fingerprint(project);
        if (actual != manifest.fingerprint)
            throw data_error("manifest fingerprint " + manifest.fingerprint + " does not match project fingerprint " +
                             actual);
    }
    const TruthModule* m = manifest.find(module);
    if (!m) throw usage_error("manifest has no module '" + std::string(module) + "'");
    return evaluate(slice, *m, project, tool);
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

LineSets grep_baseline(const SourceProject& project, const std::vector<std::string>& terms) {
    std::vector<std::string> needles;
    for (const auto& t : terms)
        if (!t.empty()) needles.push_back(lower(t));
    if (needles.empty()) throw usage_error("grep baseline needs at least one non-empty term");
    LineSets hits;
    for (const auto& f : project.files) {
        const auto lines = split_lines(f.text);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::string l = lower(lines[i]);
            if (std::any_of(needles.begin(), needles.end(), [&](const std::string& n) { return l.find(n) != std::string::npos; }))
                hits[f.path].insert(static_cast<int>(i + 1));
        }
    }
    return code_lines_only(hits, project);
}

// ---- classification --------------------------------------------------------

namespace {

std::map<std::string, std::size_t> count_tags(const std::vector<TaggedLine>& lines) {
    std::map<std::string, std::size_t> out;
    for (const auto& l : lines) ++out[l.tag];
    return out;
}

std::string trimmed_line(const ProgramModel& model, const std::string& file, int line) {
    const ModelFile* mf = model.file(file);
    if (!mf || line < 1 || line > static_cast<int>(mf->lines.size())) return {};
    const std::string& s = mf->lines[static_cast<std::size_t>(line - 1)];
    const auto b = s.find_first_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b);
}

std::string miss_category(const ProgramModel& model, const std::string& file, int line) {
    const auto stmt = model.statement_at(file, line);
    const std::string text = trimmed_line(model, file, line);
    if (!text.empty() && text[0] == '#') return "macro-related";
    if (!stmt) return "data-dependence-gap";
    const Statement& s = model.statements[static_cast<std::size_t>(*stmt)];
    if (s.kind == StatementKind::macro_directive) return "macro-related";
    if (s.kind == StatementKind::declaration || !s.prototypes.empty()) return "declaration-related";
    if (s.lines.first != s.lines.last) return "multi-line";
    return "data-dependence-gap";
}

}  // namespace

std::map<std::string, std::size_t> DiffClassification::missing_counts() const { return count_tags(missing); }
std::map<std::string, std::size_t> DiffClassification::additional_counts() const { return count_tags(additional); }

DiffClassification classify_diff(const EvalReport& report, const SliceReport& slice_report, const ProgramModel& model) {
    DiffClassification out;
    for (const auto& [file, lines] : report.missing)
        for (int l : lines) out.missing.push_back({file, l, miss_category(model, file, l)});
    for (const auto& [file, lines] : report.additional) {
        const auto f = slice_report.files.find(file);
        for (int l : lines) {
            std::string tag = "grep-match";
            if (f != slice_report.files.end())
                if (auto o = f->second.find(l); o != f->second.end()) tag = to_string(o->second.origin);
            out.additional.push_back({file, l, tag});
        }
    }
    return out;
}

// ---- output ----------------------------------------------------------------

namespace {

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

nlohmann::json lines_json(const LineSets& sets) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [file, lines] : sets) j[file] = std::vector<int>(lines.begin(), lines.end());
    return j;
}

}  // namespace

std::string format_eval_table(const std::vector<EvalReport>& reports) {
    std::size_t name_w = 6;
    for (const auto& r : reports) name_w = std::max(name_w, r.module.size());
    std::ostringstream out;
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
    auto num = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
    out << pad("Module", name_w) << "  Tool  " << num("Lines", 7) << num("Correct", 9) << num("Missing", 9)
        << num("Additional", 12) << num("Precision", 11) << num("Recall", 9) << '\n';
    for (const auto& r : reports) {
        const std::size_t c = line_total(r.correct), m = line_total(r.missing), a = line_total(r.additional);
        out << pad(r.module, name_w) << "  " << pad(to_string(r.tool), 4) << "  " << num(std::to_string(c + m), 7)
            << num(std::to_string(c), 9) << num(std::to_string(m), 9) << num(std::to_string(a), 12)
            << num(fixed(r.precision * 100.0, 2) + "%", 11) << num(fixed(r.recall * 100.0, 2) + "%", 9) << '\n';
    }
    return out.str();
}

std::string format_eval_json(const std::vector<EvalReport>& reports,
                             const std::vector<DiffClassification>& classifications) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        nlohmann::json j;
        j["module"] = r.module;
        j["tool"] = to_string(r.tool);
        j["correct_count"] = line_total(r.correct);
        j["missing_count"] = line_total(r.missing);
        j["additional_count"] = line_total(r.additional);
        j["precision"] = r.precision;
        j["recall"] = r.recall;
        j["correct"] = lines_json(r.correct);
        j["missing"] = lines_json(r.missing);
        j["additional"] = lines_json(r.additional);
        if (i < classifications.size()) {
            j["missing_categories"] = classifications[i].missing_counts();
            j["additional_origins"] = classifications[i].additional_counts();
        }
        arr.push_back(std::move(j));
    }
    return nlohmann::json{{"format", "fex-eval"}, {"version", 1}, {"reports", arr}}.dump(2) + "\n";
}

std::string format_scatter_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "precision,recall,label\n";
    for (const auto& r : reports) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.15g,%.15g,", r.precision, r.recall);
        out << buf << r.module << " (" << to_string(r.tool) << ")\n";
    }
    return out.str();
}

}  // namespace fex
