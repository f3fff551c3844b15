#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fex/documents.hpp"
#include "fex/program_model.hpp"
#include "fex/project.hpp"
#include "fex/slicer.hpp"

namespace fex {

using LineSets = std::map<std::string, std::set<int>>;  // file -> 1-based lines

std::size_t line_total(const LineSets& sets);

// ---- ground truth ----------------------------------------------------------

struct TruthModule {
    std::string name;
    std::vector<std::string> terms;
    std::vector<std::string> notes;
    std::map<std::string, std::vector<LineSpan>> ranges;  // file -> sorted, disjoint

    LineSets line_sets() const;
};

struct GroundTruthManifest {
    std::string fingerprint;  // empty: not pinned to a project snapshot
    std::vector<TruthModule> modules;

    const TruthModule* find(std::string_view name) const;
};

/// `FEXM 1` text:
///   fingerprint <hex>|-
///   module <name>
///   terms <t1,t2,...>
///   note <free text>
///   range <first>-<last> <path>
///   end-module
///   end
GroundTruthManifest parse_manifest(std::string_view text);
std::string format_manifest(const GroundTruthManifest& manifest);
GroundTruthManifest load_manifest(const std::filesystem::path& path);

// ---- metrics ---------------------------------------------------------------

enum class Tool { fex, grep };
const char* to_string(Tool t);

struct EvalReport {
    std::string module;
    Tool tool = Tool::fex;
    LineSets correct;
    LineSets missing;
    LineSets additional;
    double precision = 0.0;
    double recall = 0.0;
};

double precision_of(std::size_t correct, std::size_t additional);
double recall_of(std::size_t correct, std::size_t missing);

/// Drops blank and comment-only lines, and lines outside the project.
LineSets code_lines_only(const LineSets& sets, const SourceProject& project);

/// Set-level comparison after comment/blank filtering of both sides.
EvalReport evaluate(const LineSets& slice, const TruthModule& truth, const SourceProject& project,
                    Tool tool = Tool::fex);

/// Same, after checking the manifest's fingerprint against the project.
EvalReport evaluate(const LineSets& slice, const GroundTruthManifest& manifest, std::string_view module,
                    const SourceProject& project, Tool tool = Tool::fex);

/// Lines containing any term as a case-insensitive substring, minus
/// comment-only lines.
LineSets grep_baseline(const SourceProject& project, const std::vector<std::string>& terms);

// ---- root-cause tagging ----------------------------------------------------

struct TaggedLine {
    std::string file;
    int line = 0;
    std::string tag;  // miss category, or origin reason for additional lines

    bool operator==(const TaggedLine&) const = default;
};

struct DiffClassification {
    std::vector<TaggedLine> missing;
    std::vector<TaggedLine> additional;

    std::map<std::string, std::size_t> missing_counts() const;
    std::map<std::string, std::size_t> additional_counts() const;
};

/// Missing lines: macro-related, declaration-related, multi-line or
/// data-dependence gap. Additional lines carry the slicer's origin reason
/// (`grep-match` when the report has none).
DiffClassification classify_diff(const EvalReport& report, const SliceReport& slice_report,
                                 const ProgramModel& model);

// ---- output ----------------------------------------------------------------

/// Columns: module, tool, truth lines, correct, missing, additional, precision, recall.
std::string format_eval_table(const std::vector<EvalReport>& reports);
std::string format_eval_json(const std::vector<EvalReport>& reports,
                             const std::vector<DiffClassification>& classifications = {});
/// `precision,recall,label` rows for plotting.
std::string format_scatter_csv(const std::vector<EvalReport>& reports);

}  // namespace fex
