#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fex/documents.hpp"
#include "fex/error.hpp"
#include "fex/lexer.hpp"
#include "fex/project.hpp"

namespace fex {

enum class StatementKind {
    declaration,
    assignment,
    expression,
    if_header,
    else_header,
    loop_header,
    switch_header,
    case_label,
    return_stmt,
    jump,
    block_open,
    block_close,
    function_header,
    macro_directive,
};

const char* to_string(StatementKind kind);

enum class BlockKind { function_body, compound, if_body, else_body, loop_body, do_body, switch_body, opaque_body };

const char* to_string(BlockKind kind);

enum class JumpKind { return_, break_, continue_, goto_ };

struct Jump {
    JumpKind kind = JumpKind::return_;
    int target_block = -1;  // break/continue: the loop or switch body left
    std::string label;      // goto
    bool with_value = false;
};

enum class DirectiveKind { none, include, define, conditional_open, conditional_mid, conditional_close, other };

struct CallSite {
    std::string callee;
    bool consumes_value = false;  // the call's result flows into the statement
    int function = -1;            // index into ProgramModel::functions, -1 when external

    bool operator==(const CallSite&) const = default;
};

/// One source statement. Everything written on the same physical lines is a
/// single statement, so `} else {` is one statement that closes a block,
/// heads the else branch and opens another block.
struct Statement {
    int id = 0;
    std::string file;
    LineSpan lines;
    StatementKind kind = StatementKind::expression;
    std::vector<std::string> var_uses;     // sorted, unique
    std::vector<std::string> var_defs;     // sorted, unique
    std::vector<std::string> strong_defs;  // defs that overwrite the whole variable
    std::vector<std::string> declared;     // names declared (variables, params, macros, types)
    std::vector<std::string> callees;      // sorted, unique
    std::vector<CallSite> calls;
    std::vector<std::string> prototypes;   // function names declared without a body
    int block = -1;                        // enclosing block, -1 at file scope
    std::string function;                  // enclosing function, empty at file scope
    std::vector<Jump> jumps;
    std::string label;                     // `name:` defined here
    std::vector<int> opens;                // blocks whose opening this statement holds
    std::vector<int> closes;               // blocks whose closing brace this statement holds
    std::vector<int> controls;             // blocks governed by a header in this statement
    int partner = -1;                      // else -> if, do <-> while tail
    DirectiveKind directive = DirectiveKind::none;
    int directive_group = -1;              // #if ... #endif chain
    bool opaque = false;
    bool multi_declarator = false;

    bool uses(std::string_view var) const;
    bool defines(std::string_view var) const;
    bool strongly_defines(std::string_view var) const;
    bool declares(std::string_view var) const;
    bool is_structural() const;  // braces and function headers only
};

struct Block {
    int id = 0;
    BlockKind kind = BlockKind::compound;
    int parent = -1;
    int open_stmt = -1;         // statement holding '{', or the header of a braceless body
    int close_stmt = -1;        // statement holding '}', -1 for braceless bodies
    int controlling_stmt = -1;  // if/else/loop/switch header, or function header
    bool braced = true;
    std::string file;
    std::string function;
    std::vector<int> statements;  // statements whose enclosing block is this one
    std::vector<int> children;
};

struct FunctionDef {
    std::string name;
    std::string file;
    std::vector<std::string> params;
    int header_stmt = -1;
    int body_block = -1;
    int first_stmt = -1;  // statement id range covered by the definition
    int last_stmt = -1;
    std::vector<int> return_sites;
    std::vector<int> declaration_sites;  // prototypes
};

/// #if/#ifdef/#ifndef ... #elif/#else ... #endif chain.
struct DirectiveGroup {
    std::string file;
    std::vector<int> members;  // statement ids in order
};

struct ModelFile {
    std::string path;
    std::vector<std::string> lines;
    std::vector<lex::LineClass> line_classes;
    std::vector<int> statement_at_line;  // index line-1, -1 when no statement covers it
};

struct CallEdge {
    int caller_stmt = -1;
    std::string callee;
    int function = -1;  // -1: external
    bool consumes_value = false;
};

struct ProgramModel {
    std::vector<ModelFile> files;
    std::vector<Statement> statements;
    std::vector<Block> blocks;
    std::vector<FunctionDef> functions;
    std::map<std::string, std::vector<int>> globals;  // file-scope and macro definitions
    std::vector<CallEdge> call_edges;
    std::vector<std::pair<int, std::string>> assign_from_call;  // (call stmt, receiving var)
    std::vector<DirectiveGroup> directive_groups;
    std::set<std::string> externals;  // callees without a definition
    Diagnostics diagnostics;

    const ModelFile* file(std::string_view path) const;
    /// Statement covering (file, line), if any.
    std::optional<int> statement_at(std::string_view path, int line) const;
    /// Function definition by name, preferring one in `file`.
    std::optional<int> find_function(std::string_view name, std::string_view file = {}) const;
    bool is_ancestor_block(int ancestor, int block) const;  // reflexive
};

ProgramModel build_program_model(const SourceProject& project);

struct Resolution {
    std::set<int> reaching;     // definitions that may reach the use
    std::set<int> declaration;  // the binding declaration(s)
    bool external = false;      // nothing in the project defines the name

    std::set<int> all() const;
};

/// Definitions of `var` visible at statement `stmt`: the latest killing
/// definition along the block nesting chain plus every later non-killing
/// one (branches, address-taken writes, loop-carried definitions), then
/// parameters and file-scope or macro definitions when nothing local kills.
Resolution resolve_definitions(const ProgramModel& model, int stmt, std::string_view var);

/// Structured text dump, one statement per line.
std::string dump_model(const ProgramModel& model);

}  // namespace fex
