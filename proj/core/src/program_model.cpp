#include "fex/program_model.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "c_structure.hpp"

namespace fex {

const char* to_string(StatementKind kind) {
    switch (kind) {
        case StatementKind::declaration: return "declaration";
        case StatementKind::assignment: return "assignment";
        case StatementKind::expression: return "expression";
        case StatementKind::if_header: return "if-header";
        case StatementKind::else_header: return "else-header";
        case StatementKind::loop_header: return "loop-header";
        case StatementKind::switch_header: return "switch-header";
        case StatementKind::case_label: return "case-label";
        case StatementKind::return_stmt: return "return";
        case StatementKind::jump: return "break-continue-goto";
        case StatementKind::block_open: return "block-open";
        case StatementKind::block_close: return "block-close";
        case StatementKind::function_header: return "function-header";
        case StatementKind::macro_directive: return "macro-directive";
    }
    return "expression";
}

const char* to_string(BlockKind kind) {
    switch (kind) {
        case BlockKind::function_body: return "function-body";
        case BlockKind::compound: return "compound";
        case BlockKind::if_body: return "if-body";
        case BlockKind::else_body: return "else-body";
        case BlockKind::loop_body: return "loop-body";
        case BlockKind::do_body: return "do-body";
        case BlockKind::switch_body: return "switch-body";
        case BlockKind::opaque_body: return "opaque-body";
    }
    return "compound";
}

namespace {

bool contains_sorted(const std::vector<std::string>& v, std::string_view s) {
    return std::binary_search(v.begin(), v.end(), s, std::less<>());
}

}  // namespace

bool Statement::uses(std::string_view var) const { return contains_sorted(var_uses, var); }
bool Statement::defines(std::string_view var) const { return contains_sorted(var_defs, var); }
bool Statement::strongly_defines(std::string_view var) const { return contains_sorted(strong_defs, var); }
bool Statement::declares(std::string_view var) const { return contains_sorted(declared, var); }

bool Statement::is_structural() const {
    return kind == StatementKind::block_open || kind == StatementKind::block_close ||
           kind == StatementKind::function_header;
}

const ModelFile* ProgramModel::file(std::string_view path) const {
    for (const auto& f : files)
        if (f.path == path) return &f;
    return nullptr;
}

std::optional<int> ProgramModel::statement_at(std::string_view path, int line) const {
    const ModelFile* f = file(path);
    if (!f || line < 1 || line > static_cast<int>(f->statement_at_line.size())) return std::nullopt;
    const int s = f->statement_at_line[static_cast<std::size_t>(line - 1)];
    if (s < 0) return std::nullopt;
    return s;
}

std::optional<int> ProgramModel::find_function(std::string_view name, std::string_view file_path) const {
    std::optional<int> any;
    for (std::size_t i = 0; i < functions.size(); ++i) {
        if (functions[i].name != name) continue;
        if (functions[i].file == file_path) return static_cast<int>(i);
        if (!any) any = static_cast<int>(i);
    }
    return any;
}

bool ProgramModel::is_ancestor_block(int ancestor, int block) const {
    while (block >= 0) {
        if (block == ancestor) return true;
        block = blocks[static_cast<std::size_t>(block)].parent;
    }
    return ancestor < 0;
}

namespace {

using lex::Token;
using lex::TokenKind;
using detail::npos;

bool is_p(const Token& t, std::string_view s) { return t.kind == TokenKind::punctuation && t.text == s; }
bool is_w(const Token& t) { return t.kind == TokenKind::word; }
bool is_keyword(const Token& t) { return is_w(t) && lex::is_c_keyword(t.text); }
bool is_name(const Token& t) { return is_w(t) && !lex::is_c_keyword(t.text); }

constexpr std::array<std::string_view, 24> kTypeWords = {
    "void",  "char",   "short",    "int",      "long",     "float",    "double", "signed",
    "unsigned", "_Bool", "_Complex", "_Imaginary", "const", "volatile", "restrict", "static",
    "extern", "register", "auto",  "inline",   "typedef",  "struct",   "union",  "enum"};

constexpr std::array<std::string_view, 10> kBaseTypes = {
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool"};

bool is_type_word(const Token& t) {
    return is_w(t) && std::find(kTypeWords.begin(), kTypeWords.end(), t.text) != kTypeWords.end();
}

bool is_base_type(const Token& t) {
    return is_w(t) && std::find(kBaseTypes.begin(), kBaseTypes.end(), t.text) != kBaseTypes.end();
}

bool is_assign_op(const Token& t) {
    static constexpr std::array<std::string_view, 11> ops = {"=",  "+=", "-=", "*=",  "/=", "%=",
                                                             "&=", "|=", "^=", "<<=", ">>="};
    return t.kind == TokenKind::punctuation && std::find(ops.begin(), ops.end(), t.text) != ops.end();
}

bool is_attribute_word(const Token& t) {
    return is_w(t) && (t.text == "__attribute__" || t.text == "__declspec" || t.text == "__asm__" ||
                       t.text == "asm" || t.text == "__asm");
}

int priority(StatementKind k) {
    switch (k) {
        case StatementKind::function_header: return 0;
        case StatementKind::if_header: return 1;
        case StatementKind::else_header: return 2;
        case StatementKind::loop_header: return 3;
        case StatementKind::switch_header: return 4;
        case StatementKind::case_label: return 5;
        case StatementKind::return_stmt: return 6;
        case StatementKind::jump: return 7;
        case StatementKind::declaration: return 8;
        case StatementKind::assignment: return 9;
        case StatementKind::expression: return 10;
        case StatementKind::macro_directive: return 11;
        case StatementKind::block_open: return 12;
        case StatementKind::block_close: return 13;
    }
    return 14;
}

struct Piece {
    int first_line = 0;
    int last_line = 0;
    std::size_t seq = 0;
    StatementKind kind = StatementKind::expression;
    int block = -1;
    std::string function;
    std::set<std::string> uses, strong, weak, declared, callees;
    std::vector<CallSite> calls;
    std::vector<std::string> prototypes;
    std::vector<Jump> jumps;
    std::string label;
    int partner = -1;
    DirectiveKind directive = DirectiveKind::none;
    int directive_group = -1;
    bool opaque = false;
    bool multi_declarator = false;
};

struct BlockDraft {
    BlockKind kind = BlockKind::compound;
    int parent = -1;
    int open_piece = -1;
    int close_piece = -1;
    int controlling_piece = -1;
    bool braced = true;
    std::string function;
};

struct FunctionDraft {
    std::string name;
    std::vector<std::string> params;
    int header_piece = -1;
    int close_piece = -1;
    int body_block = -1;
};

struct Lvalue {
    std::size_t base = npos;
    bool strong = true;
};

/// Parses one file into pieces (syntactic fragments) and block drafts.
class FileParser {
public:
    FileParser(const SourceFile& file, int block_offset, Diagnostics& diags)
        : file_(file), block_offset_(block_offset), diags_(diags) {}

    std::vector<Piece> pieces;
    std::vector<BlockDraft> blocks;
    std::vector<FunctionDraft> functions;
    std::vector<std::vector<int>> groups;  // directive groups as piece indices

    void run() {
        Diagnostics lex_diags;
        all_ = lex::lex_file(file_.text, &lex_diags, file_.path);
        diags_.insert(diags_.end(), lex_diags.begin(), lex_diags.end());
        t_ = detail::code_tokens(all_);
        auto scan = detail::find_functions(t_);
        if (!scan.balanced) {
            diags_.push_back({file_.path, scan.error_line,
                              "unbalanced brackets; statements parsed without function structure"});
            scan.functions.clear();
        }

        std::size_t pos = 0;
        std::size_t fi = 0;
        while (pos < t_.size()) {
            if (fi < scan.functions.size() && scan.functions[fi].first_token <= pos) {
                const auto& fn = scan.functions[fi++];
                if (fn.first_token < pos) continue;  // overlapped by a preceding declaration
                parse_function(fn);
                pos = fn.close_brace + 1;
                continue;
            }
            const std::size_t limit = fi < scan.functions.size() ? scan.functions[fi].first_token : t_.size();
            pos = parse_file_scope(pos, limit);
        }
        parse_directives();
        assign_directive_blocks();
    }

private:
    // ---- piece helpers -------------------------------------------------

    int new_piece(std::size_t a, std::size_t b_inclusive, StatementKind kind, int block) {
        Piece p;
        p.first_line = t_[a].line;
        p.last_line = t_[std::max(a, b_inclusive)].line;
        p.seq = pieces.size();
        p.kind = kind;
        p.block = block;
        p.function = fn_;
        pieces.push_back(std::move(p));
        return static_cast<int>(pieces.size()) - 1;
    }

    int new_block(BlockKind kind, int parent, int controlling_piece) {
        BlockDraft b;
        b.kind = kind;
        b.parent = parent;
        b.controlling_piece = controlling_piece;
        b.function = fn_;
        blocks.push_back(b);
        return block_offset_ + static_cast<int>(blocks.size()) - 1;
    }

    BlockDraft& block(int id) { return blocks[static_cast<std::size_t>(id - block_offset_)]; }

    void diag(int line, const std::string& message) { diags_.push_back({file_.path, line, message}); }

    std::size_t match(std::size_t open) const { return detail::match_forward(t_, open); }

    // ---- expression analysis -------------------------------------------

    bool unary_position(std::size_t k, std::size_t a) const {
        if (k == a) return true;
        const Token& prev = t_[k - 1];
        if (prev.kind == TokenKind::punctuation) return prev.text != ")" && prev.text != "]";
        return is_keyword(prev);
    }

    Lvalue lvalue_before(std::size_t p, std::size_t a) const {
        Lvalue lv;
        if (p == a) return {};
        std::size_t j = p - 1;
        while (true) {
            if (is_p(t_[j], "]")) {
                const std::size_t m = detail::match_backward(t_, j);
                if (m == npos || m <= a) return {};
                lv.strong = false;
                j = m - 1;
                continue;
            }
            if (is_p(t_[j], ")")) {
                const std::size_t m = detail::match_backward(t_, j);
                if (m == npos || m < a) return {};
                if (m > a && is_name(t_[m - 1])) return {};  // call result
                for (std::size_t k = m + 1; k < j; ++k) {
                    if (is_name(t_[k]) && !(is_p(t_[k - 1], ".") || is_p(t_[k - 1], "->"))) {
                        lv.base = k;
                        lv.strong = false;
                        return lv;
                    }
                }
                return {};
            }
            if (is_name(t_[j])) {
                if (j > a && (is_p(t_[j - 1], ".") || is_p(t_[j - 1], "->"))) {
                    lv.strong = false;
                    if (j < a + 2) return {};
                    j -= 2;
                    continue;
                }
                lv.base = j;
                if (j > a && is_p(t_[j - 1], "*") && unary_position(j - 1, a)) lv.strong = false;
                return lv;
            }
            return {};
        }
    }

    Lvalue lvalue_after(std::size_t i, std::size_t b) const {
        Lvalue lv;
        while (i < b && (is_p(t_[i], "(") || is_p(t_[i], "*"))) {
            lv.strong = false;
            ++i;
        }
        if (i >= b || !is_name(t_[i])) return {};
        lv.base = i;
        if (i + 1 < b && (is_p(t_[i + 1], ".") || is_p(t_[i + 1], "->") || is_p(t_[i + 1], "[")))
            lv.strong = false;
        return lv;
    }

    void analyze_expr(std::size_t a, std::size_t b, Piece& p, std::size_t discarded_call = npos) {
        std::set<std::size_t> pure_defs;
        for (std::size_t i = a; i < b; ++i) {
            const Token& tok = t_[i];
            if (tok.kind != TokenKind::punctuation) continue;
            if (is_assign_op(tok)) {
                const Lvalue lv = lvalue_before(i, a);
                if (lv.base == npos) continue;
                const std::string& name = t_[lv.base].text;
                if (lv.strong) {
                    p.strong.insert(name);
                    if (tok.text == "=") pure_defs.insert(lv.base);
                } else {
                    p.weak.insert(name);
                }
            } else if (tok.text == "++" || tok.text == "--") {
                const bool postfix = i > a && (is_name(t_[i - 1]) || is_p(t_[i - 1], ")") || is_p(t_[i - 1], "]"));
                const Lvalue lv = postfix ? lvalue_before(i, a) : lvalue_after(i + 1, b);
                if (lv.base == npos) continue;
                (lv.strong ? p.strong : p.weak).insert(t_[lv.base].text);
            } else if (tok.text == "&" && unary_position(i, a)) {
                const Lvalue lv = lvalue_after(i + 1, b);
                if (lv.base != npos) p.weak.insert(t_[lv.base].text);
            }
        }
        for (std::size_t i = a; i < b; ++i) {
            const Token& tok = t_[i];
            if (!is_name(tok)) continue;
            if (i > a && (is_p(t_[i - 1], ".") || is_p(t_[i - 1], "->"))) continue;
            if (pure_defs.count(i)) continue;
            if (i + 1 < b && is_p(t_[i + 1], "(")) {
                p.callees.insert(tok.text);
                p.calls.push_back({tok.text, i != discarded_call, -1});
                continue;
            }
            p.uses.insert(tok.text);
        }
    }

    // ---- declarations --------------------------------------------------

    bool looks_like_declaration(std::size_t a, std::size_t b) const {
        if (a >= b) return false;
        if (is_type_word(t_[a])) return true;
        if (!is_name(t_[a])) return false;
        std::size_t k = a + 1;
        if (k < b && is_name(t_[k])) return true;
        while (k < b && is_p(t_[k], "*")) ++k;
        if (k > a + 1 && k < b && is_name(t_[k])) {
            if (k + 1 == b) return true;
            const Token& n = t_[k + 1];
            return is_p(n, "=") || is_p(n, ";") || is_p(n, ",") || is_p(n, "[") || is_p(n, ")");
        }
        return false;
    }

    void analyze_aggregate_body(std::size_t a, std::size_t b, Piece& p, bool is_enum) {
        if (is_enum) {
            bool expect_name = true;
            for (std::size_t k = a; k < b; ++k) {
                if (is_p(t_[k], ",")) {
                    expect_name = true;
                } else if (is_name(t_[k])) {
                    if (expect_name) {
                        p.declared.insert(t_[k].text);
                        p.strong.insert(t_[k].text);
                    } else {
                        p.uses.insert(t_[k].text);
                    }
                    expect_name = false;
                }
            }
            return;
        }
        int bracket = 0;
        for (std::size_t k = a; k < b; ++k) {
            if (is_p(t_[k], "[")) ++bracket;
            else if (is_p(t_[k], "]")) --bracket;
            if (!is_name(t_[k])) continue;
            if (bracket > 0) {
                p.uses.insert(t_[k].text);
                continue;
            }
            if (k > a && (is_p(t_[k - 1], ".") || is_p(t_[k - 1], "->"))) continue;
            const bool type_use = k + 1 < b && (is_name(t_[k + 1]) || is_p(t_[k + 1], "*"));
            if (type_use) p.uses.insert(t_[k].text);
        }
    }

    // Consumes the declaration-specifier prefix, returns the first declarator token.
    std::size_t declaration_prefix(std::size_t i, std::size_t b, Piece& p, bool& is_typedef) {
        bool saw_base = false;
        while (i < b) {
            const Token& tok = t_[i];
            if (is_w(tok) && (tok.text == "struct" || tok.text == "union" || tok.text == "enum")) {
                saw_base = true;
                std::size_t k = i + 1;
                std::string tag;
                if (k < b && is_name(t_[k])) tag = t_[k++].text;
                if (k < b && is_p(t_[k], "{")) {
                    std::size_t m = match(k);
                    if (m == npos || m >= b) m = b - 1;
                    if (!tag.empty()) {
                        p.declared.insert(tag);
                        p.strong.insert(tag);
                    }
                    analyze_aggregate_body(k + 1, m, p, tok.text == "enum");
                    i = m + 1;
                } else {
                    if (!tag.empty()) p.uses.insert(tag);
                    i = k;
                }
                continue;
            }
            if (is_type_word(tok)) {
                if (tok.text == "typedef") is_typedef = true;
                if (is_base_type(tok)) saw_base = true;
                ++i;
                continue;
            }
            if (is_attribute_word(tok) && i + 1 < b && is_p(t_[i + 1], "(")) {
                const std::size_t m = match(i + 1);
                i = (m == npos || m >= b) ? b : m + 1;
                continue;
            }
            if (is_name(tok) && !saw_base && i + 1 < b &&
                (is_name(t_[i + 1]) || is_p(t_[i + 1], "*") || is_p(t_[i + 1], "("))) {
                p.uses.insert(tok.text);
                saw_base = true;
                ++i;
                continue;
            }
            break;
        }
        return i;
    }

    // Returns declared names in order.
    std::vector<std::string> analyze_declaration(std::size_t a, std::size_t b, Piece& p) {
        std::vector<std::string> names;
        bool is_typedef = false;
        std::size_t i = declaration_prefix(a, b, p, is_typedef);
        int count = 0;
        while (i < b) {
            std::size_t e = i;
            int depth = 0;
            for (; e < b; ++e) {
                const Token& tok = t_[e];
                if (is_p(tok, "(") || is_p(tok, "[") || is_p(tok, "{")) ++depth;
                else if (is_p(tok, ")") || is_p(tok, "]") || is_p(tok, "}")) --depth;
                else if (depth == 0 && is_p(tok, ",")) break;
            }
            if (e > i) {
                if (auto name = analyze_declarator(i, e, p, is_typedef)) names.push_back(*name);
                ++count;
            }
            i = e + 1;
        }
        if (count > 1) p.multi_declarator = true;
        return names;
    }

    std::optional<std::string> analyze_declarator(std::size_t a, std::size_t e, Piece& p, bool is_typedef) {
        std::size_t eq = npos;
        int depth = 0;
        for (std::size_t k = a; k < e; ++k) {
            if (is_p(t_[k], "(") || is_p(t_[k], "[") || is_p(t_[k], "{")) ++depth;
            else if (is_p(t_[k], ")") || is_p(t_[k], "]") || is_p(t_[k], "}")) --depth;
            else if (depth == 0 && is_p(t_[k], "=")) {
                eq = k;
                break;
            }
        }
        const std::size_t dend = eq == npos ? e : eq;
        std::size_t k = a;
        int parens = 0;
        while (k < dend && (is_p(t_[k], "*") || is_p(t_[k], "(") || is_keyword(t_[k]) || is_attribute_word(t_[k]))) {
            if (is_p(t_[k], "(")) ++parens;
            if (is_attribute_word(t_[k]) && k + 1 < dend && is_p(t_[k + 1], "(")) {
                const std::size_t m = match(k + 1);
                k = (m == npos || m >= dend) ? dend : m + 1;
                continue;
            }
            ++k;
        }
        std::optional<std::string> name;
        if (k < dend && is_name(t_[k])) {
            name = t_[k].text;
            ++k;
        }
        bool prototype = false;
        while (k < dend) {
            if (is_p(t_[k], ")")) {
                ++k;
                continue;
            }
            if (is_p(t_[k], "(")) {
                const std::size_t m = match(k);
                if (parens == 0 && name) prototype = true;
                k = (m == npos || m >= dend) ? dend : m + 1;
                continue;
            }
            if (is_p(t_[k], "[")) {
                std::size_t m = match(k);
                if (m == npos || m >= dend) m = dend;
                analyze_expr(k + 1, m, p);
                k = m + 1;
                continue;
            }
            if (is_p(t_[k], ":")) {  // bit-field width
                analyze_expr(k + 1, dend, p);
                break;
            }
            if (is_attribute_word(t_[k]) && k + 1 < dend && is_p(t_[k + 1], "(")) {
                const std::size_t m = match(k + 1);
                k = (m == npos || m >= dend) ? dend : m + 1;
                continue;
            }
            ++k;
        }
        if (name) {
            if (prototype && !is_typedef) {
                p.prototypes.push_back(*name);
                name.reset();
            } else {
                p.declared.insert(*name);
                p.strong.insert(*name);
            }
        }
        if (eq != npos) analyze_expr(eq + 1, e, p);
        return name;
    }

    // ---- file scope ----------------------------------------------------

    std::size_t parse_file_scope(std::size_t pos, std::size_t limit) {
        std::size_t k = pos;
        int depth = 0;
        for (; k < limit; ++k) {
            const Token& tok = t_[k];
            if (is_p(tok, "(") || is_p(tok, "[") || is_p(tok, "{")) ++depth;
            else if (is_p(tok, ")") || is_p(tok, "]") || is_p(tok, "}")) depth = std::max(0, depth - 1);
            else if (depth == 0 && is_p(tok, ";")) break;
        }
        const std::size_t end = std::min(k, limit);  // exclusive of ';'
        const std::size_t last = k < limit ? k : limit - 1;
        const int id = new_piece(pos, last, StatementKind::declaration, -1);
        Piece& p = pieces[static_cast<std::size_t>(id)];
        if (looks_like_declaration(pos, end)) {
            analyze_declaration(pos, end, p);
        } else if (pos < end) {
            p.kind = StatementKind::expression;
            p.opaque = true;
            analyze_expr(pos, end, p);
            diag(t_[pos].line, "unrecognized file-scope construct kept as an opaque statement");
        }
        return k < limit ? k + 1 : limit;
    }

    // ---- functions -----------------------------------------------------

    void parse_function(const detail::FunctionExtent& fn) {
        fn_ = fn.name;
        FunctionDraft draft;
        draft.name = fn.name;
        const int body = new_block(BlockKind::function_body, -1, -1);
        draft.body_block = body;

        const int header = new_piece(fn.first_token, fn.open_brace - 1, StatementKind::function_header, body);
        {
            Piece& p = pieces[static_cast<std::size_t>(header)];
            bool is_typedef = false;
            declaration_prefix(fn.first_token, fn.name_token, p, is_typedef);
            std::size_t i = fn.open_paren + 1;
            while (i < fn.close_paren) {
                std::size_t e = i;
                int depth = 0;
                for (; e < fn.close_paren; ++e) {
                    if (is_p(t_[e], "(") || is_p(t_[e], "[")) ++depth;
                    else if (is_p(t_[e], ")") || is_p(t_[e], "]")) --depth;
                    else if (depth == 0 && is_p(t_[e], ",")) break;
                }
                Piece scratch;
                for (auto& n : analyze_declaration(i, e, scratch)) draft.params.push_back(n);
                p.uses.insert(scratch.uses.begin(), scratch.uses.end());
                i = e + 1;
            }
            // K&R parameter declarations between ')' and '{'
            std::size_t k = fn.close_paren + 1;
            while (k < fn.open_brace) {
                std::size_t e = k;
                while (e < fn.open_brace && !is_p(t_[e], ";")) ++e;
                Piece scratch;
                analyze_declaration(k, e, scratch);
                p.uses.insert(scratch.uses.begin(), scratch.uses.end());
                k = e + 1;
            }
            for (const auto& n : draft.params) {
                p.declared.insert(n);
                p.strong.insert(n);
            }
            p.uses.erase(fn.name);
        }
        draft.header_piece = header;
        block(body).controlling_piece = header;

        const int open = new_piece(fn.open_brace, fn.open_brace, StatementKind::block_open, body);
        block(body).open_piece = open;
        parse_items(fn.open_brace + 1, fn.close_brace, body);
        const int close = new_piece(fn.close_brace, fn.close_brace, StatementKind::block_close, body);
        block(body).close_piece = close;
        draft.close_piece = close;
        functions.push_back(std::move(draft));
        fn_.clear();
    }

    void parse_items(std::size_t pos, std::size_t end, int blk) {
        while (pos < end) pos = parse_statement(pos, end, blk);
    }

    // Parses a controlled body; returns the position after it.
    std::size_t parse_body(std::size_t pos, std::size_t end, int parent, int header, BlockKind kind,
                           bool loop, bool breakable, int* block_out = nullptr) {
        const int b = new_block(kind, parent, header);
        if (block_out) *block_out = b;
        if (loop) loop_stack_.push_back(b);
        if (breakable) break_stack_.push_back(b);
        std::size_t next = pos;
        if (pos < end && is_p(t_[pos], "{")) {
            std::size_t m = match(pos);
            if (m == npos || m >= end) m = end - 1;
            const int open = new_piece(pos, pos, StatementKind::block_open, parent);
            block(b).open_piece = open;
            parse_items(pos + 1, m, b);
            const int close = new_piece(m, m, StatementKind::block_close, parent);
            block(b).close_piece = close;
            next = m + 1;
        } else {
            block(b).braced = false;
            block(b).open_piece = header;
            if (pos < end) next = parse_statement(pos, end, b);
        }
        if (loop) loop_stack_.pop_back();
        if (breakable) break_stack_.pop_back();
        return next;
    }

    // Header `kw ( ... )`; returns the index of ')' or npos.
    std::size_t header_parens(std::size_t pos, std::size_t end) const {
        if (pos + 1 >= end || !is_p(t_[pos + 1], "(")) return npos;
        const std::size_t m = match(pos + 1);
        return (m == npos || m >= end) ? npos : m;
    }

    std::size_t parse_statement(std::size_t pos, std::size_t end, int blk) {
        const Token& tok = t_[pos];

        if (is_p(tok, "{")) {
            std::size_t m = match(pos);
            if (m == npos || m >= end) m = end - 1;
            const int b = new_block(BlockKind::compound, blk, -1);
            block(b).open_piece = new_piece(pos, pos, StatementKind::block_open, blk);
            parse_items(pos + 1, m, b);
            block(b).close_piece = new_piece(m, m, StatementKind::block_close, blk);
            return m + 1;
        }
        if (is_p(tok, ";")) {
            new_piece(pos, pos, StatementKind::expression, blk);
            return pos + 1;
        }
        if (is_w(tok)) {
            const std::string& w = tok.text;
            if (w == "if" || w == "while" || w == "for" || w == "switch") {
                const std::size_t close = header_parens(pos, end);
                if (close != npos) return parse_control(pos, close, end, blk);
            } else if (w == "do") {
                return parse_do(pos, end, blk);
            } else if (w == "else") {
                diag(tok.line, "'else' without matching 'if' kept as an opaque statement");
                const int id = new_piece(pos, pos, StatementKind::else_header, blk);
                pieces[static_cast<std::size_t>(id)].opaque = true;
                return parse_body(pos + 1, end, blk, id, BlockKind::else_body, false, false);
            } else if (w == "case" || w == "default") {
                return parse_case(pos, end, blk);
            } else if (w == "return") {
                return parse_return(pos, end, blk);
            } else if (w == "break" || w == "continue" || w == "goto") {
                return parse_jump(pos, end, blk);
            } else if (is_name(tok) && pos + 1 < end && is_p(t_[pos + 1], ":")) {
                const int id = new_piece(pos, pos + 1, StatementKind::case_label, blk);
                pieces[static_cast<std::size_t>(id)].label = w;
                return pos + 2;
            }
        }
        return parse_simple(pos, end, blk);
    }

    std::size_t parse_control(std::size_t pos, std::size_t close, std::size_t end, int blk) {
        const std::string w = t_[pos].text;
        StatementKind kind = StatementKind::loop_header;
        BlockKind body_kind = BlockKind::loop_body;
        if (w == "if") {
            kind = StatementKind::if_header;
            body_kind = BlockKind::if_body;
        } else if (w == "switch") {
            kind = StatementKind::switch_header;
            body_kind = BlockKind::switch_body;
        }
        const int header = new_piece(pos, close, kind, blk);
        {
            Piece& p = pieces[static_cast<std::size_t>(header)];
            if (w == "for") {
                // init clause may declare
                std::size_t semi = pos + 2;
                int depth = 0;
                for (; semi < close; ++semi) {
                    if (is_p(t_[semi], "(")) ++depth;
                    else if (is_p(t_[semi], ")")) --depth;
                    else if (depth == 0 && is_p(t_[semi], ";")) break;
                }
                if (looks_like_declaration(pos + 2, semi)) {
                    analyze_declaration(pos + 2, semi, p);
                    analyze_expr(std::min(semi + 1, close), close, p);
                } else {
                    analyze_expr(pos + 2, close, p);
                }
            } else {
                analyze_expr(pos + 2, close, p);
            }
        }
        const bool loop = kind == StatementKind::loop_header;
        std::size_t next =
            parse_body(close + 1, end, blk, header, body_kind, loop, loop || kind == StatementKind::switch_header);
        if (w == "if" && next < end && is_w(t_[next]) && t_[next].text == "else") {
            const int else_piece = new_piece(next, next, StatementKind::else_header, blk);
            pieces[static_cast<std::size_t>(else_piece)].partner = header;
            next = parse_body(next + 1, end, blk, else_piece, BlockKind::else_body, false, false);
        }
        return next;
    }

    std::size_t parse_do(std::size_t pos, std::size_t end, int blk) {
        const int head = new_piece(pos, pos, StatementKind::loop_header, blk);
        std::size_t next = parse_body(pos + 1, end, blk, head, BlockKind::do_body, true, true);
        if (next < end && is_w(t_[next]) && t_[next].text == "while") {
            const std::size_t close = header_parens(next, end);
            if (close != npos) {
                std::size_t last = close;
                if (close + 1 < end && is_p(t_[close + 1], ";")) last = close + 1;
                const int tail = new_piece(next, last, StatementKind::loop_header, blk);
                analyze_expr(next + 2, close, pieces[static_cast<std::size_t>(tail)]);
                pieces[static_cast<std::size_t>(tail)].partner = head;
                pieces[static_cast<std::size_t>(head)].partner = tail;
                return last + 1;
            }
        }
        diag(t_[pos].line, "'do' without a 'while' condition");
        pieces[static_cast<std::size_t>(head)].opaque = true;
        return next;
    }

    std::size_t parse_case(std::size_t pos, std::size_t end, int blk) {
        std::size_t k = pos + 1;
        int depth = 0;
        int ternary = 0;
        for (; k < end; ++k) {
            if (is_p(t_[k], "(") || is_p(t_[k], "[")) ++depth;
            else if (is_p(t_[k], ")") || is_p(t_[k], "]")) --depth;
            else if (is_p(t_[k], "?")) ++ternary;
            else if (depth == 0 && is_p(t_[k], ":")) {
                if (ternary == 0) break;
                --ternary;
            } else if (depth == 0 && (is_p(t_[k], ";") || is_p(t_[k], "{") || is_p(t_[k], "}"))) {
                break;
            }
        }
        const std::size_t last = k < end ? k : end - 1;
        const int id = new_piece(pos, last, StatementKind::case_label, blk);
        analyze_expr(pos + 1, std::min(k, end), pieces[static_cast<std::size_t>(id)]);
        if (k >= end || !is_p(t_[k], ":")) {
            diag(t_[pos].line, "case label without ':'");
            pieces[static_cast<std::size_t>(id)].opaque = true;
            return k < end ? k + (is_p(t_[k], ";") ? 1 : 0) : end;
        }
        return k + 1;
    }

    std::size_t statement_end(std::size_t pos, std::size_t end, bool decl_like, bool& opaque_brace) const {
        opaque_brace = false;
        int depth = 0;
        for (std::size_t k = pos; k < end; ++k) {
            const Token& tok = t_[k];
            if (is_p(tok, "(") || is_p(tok, "[")) {
                ++depth;
            } else if (is_p(tok, ")") || is_p(tok, "]")) {
                --depth;
            } else if (is_p(tok, "{")) {
                const bool nested = depth > 0 || decl_like ||
                                    (k > pos && (is_p(t_[k - 1], "=") || is_p(t_[k - 1], ",") ||
                                                 is_p(t_[k - 1], "(") || is_p(t_[k - 1], "{") ||
                                                 (is_w(t_[k - 1]) && t_[k - 1].text == "return")));
                if (!nested) {
                    opaque_brace = true;
                    return k;
                }
                const std::size_t m = match(k);
                if (m == npos || m >= end) return end;
                k = m;
            } else if (depth <= 0 && (is_p(tok, ";") || is_p(tok, "}"))) {
                return k;
            }
        }
        return end;
    }

    std::size_t parse_return(std::size_t pos, std::size_t end, int blk) {
        bool opaque_brace = false;
        const std::size_t k = statement_end(pos, end, false, opaque_brace);
        const bool semi = k < end && is_p(t_[k], ";");
        const std::size_t last = semi ? k : (k > pos ? k - 1 : pos);
        const int id = new_piece(pos, last, StatementKind::return_stmt, blk);
        Piece& p = pieces[static_cast<std::size_t>(id)];
        analyze_expr(pos + 1, std::min(k, end), p);
        p.jumps.push_back({JumpKind::return_, -1, "", k > pos + 1});
        return semi ? k + 1 : std::max(k, pos + 1);
    }

    std::size_t parse_jump(std::size_t pos, std::size_t end, int blk) {
        std::size_t k = pos + 1;
        while (k < end && !is_p(t_[k], ";") && !is_p(t_[k], "}")) ++k;
        const bool semi = k < end && is_p(t_[k], ";");
        const int id = new_piece(pos, semi ? k : k - 1, StatementKind::jump, blk);
        Piece& p = pieces[static_cast<std::size_t>(id)];
        const std::string& w = t_[pos].text;
        Jump j;
        if (w == "break") {
            j.kind = JumpKind::break_;
            j.target_block = break_stack_.empty() ? -1 : break_stack_.back();
        } else if (w == "continue") {
            j.kind = JumpKind::continue_;
            j.target_block = loop_stack_.empty() ? -1 : loop_stack_.back();
        } else {
            j.kind = JumpKind::goto_;
            if (pos + 1 < end && is_name(t_[pos + 1])) j.label = t_[pos + 1].text;
        }
        p.jumps.push_back(j);
        return semi ? k + 1 : k;
    }

    std::size_t parse_simple(std::size_t pos, std::size_t end, int blk) {
        const bool decl_like = is_type_word(t_[pos]);
        bool opaque_brace = false;
        std::size_t k = statement_end(pos, end, decl_like, opaque_brace);
        if (k == pos) {
            // Stray closing token: keep it so every line stays covered.
            const int id = new_piece(pos, pos, StatementKind::expression, blk);
            pieces[static_cast<std::size_t>(id)].opaque = true;
            diag(t_[pos].line, "unexpected '" + t_[pos].text + "' kept as an opaque statement");
            return pos + 1;
        }
        if (opaque_brace) {
            const int header = new_piece(pos, k - 1, StatementKind::expression, blk);
            Piece& p = pieces[static_cast<std::size_t>(header)];
            p.opaque = true;
            analyze_expr(pos, k, p);
            diag(t_[pos].line, "unrecognized construct before '{' treated as an opaque block header");
            return parse_body(k, end, blk, header, BlockKind::opaque_body, false, false);
        }
        const bool semi = k < end && is_p(t_[k], ";");
        const int id = new_piece(pos, semi ? k : k - 1, StatementKind::expression, blk);
        Piece& p = pieces[static_cast<std::size_t>(id)];
        const std::size_t stop = std::min(k, end);
        if (looks_like_declaration(pos, stop)) {
            p.kind = StatementKind::declaration;
            analyze_declaration(pos, stop, p);
        } else {
            // A bare call statement discards the call's value.
            std::size_t discarded = npos;
            std::size_t first = pos;
            if (stop - pos > 4 && is_p(t_[pos], "(") && is_w(t_[pos + 1]) && t_[pos + 1].text == "void" &&
                is_p(t_[pos + 2], ")"))
                first = pos + 3;
            if (first + 1 < stop && is_name(t_[first]) && is_p(t_[first + 1], "(") &&
                match(first + 1) == stop - 1)
                discarded = first;
            analyze_expr(pos, stop, p, discarded);
            if (!p.strong.empty() || !p.weak.empty()) {
                // `&x` arguments alone do not make an assignment
                bool assigns = false;
                for (std::size_t i = pos; i < stop; ++i)
                    if (is_assign_op(t_[i]) || is_p(t_[i], "++") || is_p(t_[i], "--")) assigns = true;
                if (assigns) p.kind = StatementKind::assignment;
            }
        }
        return semi ? k + 1 : k;
    }

    // ---- directives ----------------------------------------------------

    void parse_directives() {
        const lex::Regions regions = lex::scan_regions(file_.text);
        std::vector<int> stack;
        std::size_t ti = 0;
        for (const auto& [first, last] : regions.directives) {
            std::vector<const Token*> toks;
            while (ti < all_.size() && all_[ti].line < first) ++ti;
            for (std::size_t k = ti; k < all_.size() && all_[k].line <= last; ++k)
                if (all_[k].context == lex::Context::macro) toks.push_back(&all_[k]);
            Piece p;
            p.first_line = first;
            p.last_line = last;
            p.seq = pieces.size();
            p.kind = StatementKind::macro_directive;
            p.directive = DirectiveKind::other;
            const std::string name = toks.size() > 1 && is_w(*toks[1]) ? toks[1]->text : "";
            auto names_from = [&](std::size_t from, const std::set<std::string>& skip) {
                for (std::size_t k = from; k < toks.size(); ++k) {
                    const Token& t = *toks[k];
                    if (!is_name(t) || skip.count(t.text) || t.text == "defined") continue;
                    if (k > 0 && (is_p(*toks[k - 1], ".") || is_p(*toks[k - 1], "->"))) continue;
                    if (k + 1 < toks.size() && is_p(*toks[k + 1], "(")) {
                        p.callees.insert(t.text);
                        p.calls.push_back({t.text, true, -1});
                    } else {
                        p.uses.insert(t.text);
                    }
                }
            };
            if (name == "include") {
                p.directive = DirectiveKind::include;
            } else if (name == "define" && toks.size() > 2 && is_w(*toks[2])) {
                p.directive = DirectiveKind::define;
                const Token& macro = *toks[2];
                p.declared.insert(macro.text);
                p.strong.insert(macro.text);
                std::set<std::string> params;
                std::size_t body = 3;
                if (toks.size() > 3 && is_p(*toks[3], "(") && toks[3]->offset == macro.offset + macro.text.size()) {
                    std::size_t k = 4;
                    for (; k < toks.size() && !is_p(*toks[k], ")"); ++k)
                        if (is_w(*toks[k])) params.insert(toks[k]->text);
                    body = k + 1;
                }
                params.insert(macro.text);
                names_from(body, params);
            } else if (name == "if" || name == "ifdef" || name == "ifndef") {
                p.directive = DirectiveKind::conditional_open;
                names_from(2, {});
            } else if (name == "elif" || name == "else") {
                p.directive = DirectiveKind::conditional_mid;
                names_from(2, {});
            } else if (name == "endif") {
                p.directive = DirectiveKind::conditional_close;
            } else if (name == "undef") {
                names_from(2, {});
            }
            const int id = static_cast<int>(pieces.size());
            if (p.directive == DirectiveKind::conditional_open) {
                groups.push_back({id});
                stack.push_back(static_cast<int>(groups.size()) - 1);
                p.directive_group = stack.back();
            } else if (p.directive == DirectiveKind::conditional_mid || p.directive == DirectiveKind::conditional_close) {
                if (stack.empty()) {
                    diag(first, "#" + name + " without matching #if");
                } else {
                    p.directive_group = stack.back();
                    groups[static_cast<std::size_t>(stack.back())].push_back(id);
                    if (p.directive == DirectiveKind::conditional_close) stack.pop_back();
                }
            }
            pieces.push_back(std::move(p));
        }
        for (int g : stack)
            diag(pieces[static_cast<std::size_t>(groups[static_cast<std::size_t>(g)].front())].first_line,
                 "#if without matching #endif");
    }

    // Directives sit in the innermost braced block whose braces enclose them.
    void assign_directive_blocks() {
        for (auto& p : pieces) {
            if (p.kind != StatementKind::macro_directive) continue;
            int best = -1;
            int best_size = 0;
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                const auto& bd = blocks[b];
                if (!bd.braced || bd.open_piece < 0 || bd.close_piece < 0) continue;
                const int lo = pieces[static_cast<std::size_t>(bd.open_piece)].first_line;
                const int hi = pieces[static_cast<std::size_t>(bd.close_piece)].last_line;
                if (p.first_line > lo && p.last_line < hi && (best < 0 || hi - lo < best_size)) {
                    best = static_cast<int>(b);
                    best_size = hi - lo;
                }
            }
            if (best >= 0) {
                p.block = block_offset_ + best;
                p.function = blocks[static_cast<std::size_t>(best)].function;
            }
        }
    }

    const SourceFile& file_;
    int block_offset_;
    Diagnostics& diags_;
    std::vector<Token> all_;
    std::vector<Token> t_;
    std::string fn_;
    std::vector<int> loop_stack_;
    std::vector<int> break_stack_;
};

template <typename Set>
std::vector<std::string> sorted(const Set& s) {
    std::vector<std::string> v(s.begin(), s.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

ProgramModel build_program_model(const SourceProject& project) {
    ProgramModel model;

    for (const auto& file : project.files) {
        FileParser parser(file, static_cast<int>(model.blocks.size()), model.diagnostics);
        parser.run();
        auto& pieces = parser.pieces;

        ModelFile mf;
        mf.path = file.path;
        mf.lines = split_lines(file.text);
        mf.line_classes = lex::classify_lines(file.text);
        mf.statement_at_line.assign(mf.lines.size(), -1);

        // Group pieces whose line spans overlap into statements.
        std::vector<std::size_t> order(pieces.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pieces[a].first_line < pieces[b].first_line;
        });
        std::vector<int> stmt_of(pieces.size(), -1);
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            int hi = pieces[order[i]].last_line;
            while (j + 1 < order.size() && pieces[order[j + 1]].first_line <= hi) {
                ++j;
                hi = std::max(hi, pieces[order[j]].last_line);
            }
            // Textually first piece decides the block.
            std::size_t first = order[i];
            for (std::size_t k = i; k <= j; ++k) {
                const auto& pk = pieces[order[k]];
                const auto& pf = pieces[first];
                if (pk.first_line < pf.first_line || (pk.first_line == pf.first_line && pk.seq < pf.seq))
                    first = order[k];
            }
            Statement s;
            s.id = static_cast<int>(model.statements.size());
            s.file = file.path;
            s.lines = {pieces[order[i]].first_line, hi};
            s.block = pieces[first].block;
            s.function = pieces[first].function;
            s.kind = pieces[first].kind;
            std::set<std::string> uses, defs, strong, declared, callees;
            for (std::size_t k = i; k <= j; ++k) {
                auto& p = pieces[order[k]];
                stmt_of[order[k]] = s.id;
                if (priority(p.kind) < priority(s.kind)) s.kind = p.kind;
                uses.insert(p.uses.begin(), p.uses.end());
                defs.insert(p.strong.begin(), p.strong.end());
                defs.insert(p.weak.begin(), p.weak.end());
                if (p.block == s.block) strong.insert(p.strong.begin(), p.strong.end());
                declared.insert(p.declared.begin(), p.declared.end());
                callees.insert(p.callees.begin(), p.callees.end());
                s.calls.insert(s.calls.end(), p.calls.begin(), p.calls.end());
                s.prototypes.insert(s.prototypes.end(), p.prototypes.begin(), p.prototypes.end());
                s.jumps.insert(s.jumps.end(), p.jumps.begin(), p.jumps.end());
                if (s.label.empty()) s.label = p.label;
                if (s.directive == DirectiveKind::none) s.directive = p.directive;
                s.opaque = s.opaque || p.opaque;
                s.multi_declarator = s.multi_declarator || p.multi_declarator;
                if (s.function.empty()) s.function = p.function;
            }
            s.var_uses = sorted(uses);
            s.var_defs = sorted(defs);
            s.strong_defs = sorted(strong);
            s.declared = sorted(declared);
            s.callees = sorted(callees);
            for (int line = s.lines.first; line <= s.lines.last; ++line)
                if (line >= 1 && line <= static_cast<int>(mf.statement_at_line.size()))
                    mf.statement_at_line[static_cast<std::size_t>(line - 1)] = s.id;
            model.statements.push_back(std::move(s));
            i = j + 1;
        }
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            Statement& s = model.statements[static_cast<std::size_t>(stmt_of[k])];
            if (pieces[k].partner >= 0) s.partner = stmt_of[static_cast<std::size_t>(pieces[k].partner)];
        }

        // Blocks.
        const int offset = static_cast<int>(model.blocks.size());
        auto stmt = [&](int piece) { return piece < 0 ? -1 : stmt_of[static_cast<std::size_t>(piece)]; };
        for (std::size_t b = 0; b < parser.blocks.size(); ++b) {
            const auto& bd = parser.blocks[b];
            Block blk;
            blk.id = offset + static_cast<int>(b);
            blk.kind = bd.kind;
            blk.parent = bd.parent;
            blk.open_stmt = stmt(bd.open_piece);
            blk.close_stmt = stmt(bd.close_piece);
            blk.controlling_stmt = stmt(bd.controlling_piece);
            blk.braced = bd.braced;
            blk.file = file.path;
            blk.function = bd.function;
            model.blocks.push_back(std::move(blk));
        }

        // Directive groups.
        for (const auto& g : parser.groups) {
            DirectiveGroup dg;
            dg.file = file.path;
            for (int piece : g) {
                const int s = stmt(piece);
                if (dg.members.empty() || dg.members.back() != s) dg.members.push_back(s);
            }
            const int gid = static_cast<int>(model.directive_groups.size());
            for (int s : dg.members) model.statements[static_cast<std::size_t>(s)].directive_group = gid;
            model.directive_groups.push_back(std::move(dg));
        }

        // Functions.
        for (const auto& fd : parser.functions) {
            FunctionDef f;
            f.name = fd.name;
            f.file = file.path;
            f.params = fd.params;
            f.header_stmt = stmt(fd.header_piece);
            f.body_block = fd.body_block;
            f.first_stmt = f.header_stmt;
            f.last_stmt = stmt(fd.close_piece);
            model.functions.push_back(std::move(f));
        }
        model.files.push_back(std::move(mf));
    }

    // Block roles and membership.
    for (auto& b : model.blocks) {
        if (b.braced && b.open_stmt >= 0) model.statements[static_cast<std::size_t>(b.open_stmt)].opens.push_back(b.id);
        if (b.close_stmt >= 0) model.statements[static_cast<std::size_t>(b.close_stmt)].closes.push_back(b.id);
        if (b.controlling_stmt >= 0)
            model.statements[static_cast<std::size_t>(b.controlling_stmt)].controls.push_back(b.id);
        if (b.parent >= 0) model.blocks[static_cast<std::size_t>(b.parent)].children.push_back(b.id);
    }
    for (const auto& s : model.statements)
        if (s.block >= 0) model.blocks[static_cast<std::size_t>(s.block)].statements.push_back(s.id);

    // Globals: file-scope declarations and every macro definition.
    for (const auto& s : model.statements) {
        if (s.block >= 0 && s.directive != DirectiveKind::define) continue;
        for (const auto& n : s.declared) model.globals[n].push_back(s.id);
    }

    // Function ranges, returns, prototypes.
    for (auto& f : model.functions) {
        for (int s = f.first_stmt; s >= 0 && s <= f.last_stmt; ++s) {
            const auto& st = model.statements[static_cast<std::size_t>(s)];
            for (const auto& j : st.jumps)
                if (j.kind == JumpKind::return_) {
                    f.return_sites.push_back(s);
                    break;
                }
        }
        for (const auto& s : model.statements)
            if (s.block < 0 && std::find(s.prototypes.begin(), s.prototypes.end(), f.name) != s.prototypes.end())
                f.declaration_sites.push_back(s.id);
    }

    // Function names used as values become call edges.
    std::map<std::pair<std::string, std::string>, std::set<std::string>> locals;  // (file, function)
    for (const auto& s : model.statements)
        if (!s.function.empty()) locals[{s.file, s.function}].insert(s.declared.begin(), s.declared.end());
    for (auto& s : model.statements) {
        std::vector<std::string> kept;
        const auto scope = locals.find({s.file, s.function});
        for (const auto& u : s.var_uses) {
            const bool is_var = model.globals.count(u) > 0 || (scope != locals.end() && scope->second.count(u) > 0);
            if (!is_var && model.find_function(u, s.file)) {
                s.calls.push_back({u, false, -1});
                s.callees.push_back(u);
            } else {
                kept.push_back(u);
            }
        }
        s.var_uses = std::move(kept);
        std::sort(s.callees.begin(), s.callees.end());
        s.callees.erase(std::unique(s.callees.begin(), s.callees.end()), s.callees.end());
    }

    // Call edges.
    for (auto& s : model.statements) {
        for (auto& c : s.calls) {
            if (auto f = model.find_function(c.callee, s.file)) c.function = *f;
            else if (!model.globals.count(c.callee)) model.externals.insert(c.callee);
            model.call_edges.push_back({s.id, c.callee, c.function, c.consumes_value});
            if (c.consumes_value && c.function >= 0)
                for (const auto& d : s.var_defs) model.assign_from_call.emplace_back(s.id, d);
        }
    }
    return model;
}

}  // namespace fex
