#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fex/error.hpp"
#include "fex/program_model.hpp"
#include "fex/query.hpp"

namespace fex {

enum class Origin { seed, data_dep, call_def, return_flow, block_completion, jump_completion, declaration_pull };

const char* to_string(Origin o);
std::optional<Origin> parse_origin(std::string_view s);

struct Mark {
    Origin origin = Origin::seed;
    int depth = 0;  // call/return edges crossed from the nearest seed

    bool operator==(const Mark&) const = default;
};

struct SliceState {
    std::map<int, Mark> relevant;  // statement id -> first discovery
    std::set<int> processed;
    std::set<std::string> externals;

    bool contains(int stmt) const { return relevant.count(stmt) > 0; }
};

/// Query parameters echoed into rendered files and reports.
struct Provenance {
    std::vector<std::string> terms;
    double threshold = 0.85;
    int ipd_limit = 2;
};

struct LineOrigin {
    Origin origin = Origin::seed;
    int depth = 0;

    bool operator==(const LineOrigin&) const = default;
};

struct FeatureSlice {
    SliceState state;
    std::map<std::string, std::vector<int>> lines;  // per file, sorted
    std::map<std::string, std::map<int, LineOrigin>> line_origins;
    std::map<std::string, std::string> rendered;
    Diagnostics diagnostics;

    std::size_t line_count() const;
};

/// Marks the statement around every non-comment seed location.
SliceState seed_state(const ProgramModel& model, const std::vector<SeedLocation>& seeds,
                      Diagnostics* diagnostics = nullptr);

/// Runs the dependency closure to a fixed point: data dependences, call and
/// return flow within `ipd_limit` call edges, block and jump completion, and
/// finally prototypes and #include lines of contributing files.
void close_slice(const ProgramModel& model, SliceState& state, int ipd_limit);

/// One completion pass; returns true when something new was marked.
bool complete_blocks(const ProgramModel& model, SliceState& state);

FeatureSlice extract_feature(const ProgramModel& model, const std::vector<SeedLocation>& seeds,
                             const Provenance& provenance);

/// Retained lines per file: statement spans plus continuation lines of a
/// block comment left open on a retained line.
std::map<std::string, std::vector<int>> slice_lines(const ProgramModel& model, const SliceState& state);

std::map<std::string, std::string> render_slice(const ProgramModel& model, const SliceState& state,
                                                const Provenance& provenance);

// ---- SLICE_REPORT --------------------------------------------------------

struct SliceReport {
    Provenance provenance;
    std::set<std::string> externals;
    std::map<std::string, std::map<int, LineOrigin>> files;

    std::map<std::string, std::set<int>> line_sets() const;
};

std::string format_slice_report(const FeatureSlice& slice, const Provenance& provenance);
SliceReport parse_slice_report(std::string_view text);

/// Writes <dir>/<relative path> for each contributing file and <dir>/SLICE_REPORT.
void write_slice(const FeatureSlice& slice, const Provenance& provenance, const std::filesystem::path& dir);
SliceReport read_slice_report(const std::filesystem::path& dir);

}  // namespace fex
