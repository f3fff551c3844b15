#include "c_structure.hpp"

namespace fex::detail {
namespace {

bool is_punct(const lex::Token& t, std::string_view p) {
    return t.kind == lex::TokenKind::punctuation && t.text == p;
}

std::string_view closer_for(std::string_view open) {
    if (open == "(") return ")";
    if (open == "[") return "]";
    return "}";
}

std::string_view opener_for(std::string_view close) {
    if (close == ")") return "(";
    if (close == "]") return "[";
    return "{";
}

}  // namespace

std::vector<lex::Token> code_tokens(const std::vector<lex::Token>& tokens) {
    std::vector<lex::Token> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (t.context == lex::Context::identifier) out.push_back(t);
    return out;
}

std::size_t match_forward(const std::vector<lex::Token>& tokens, std::size_t open) {
    const std::string_view o = tokens[open].text;
    const std::string_view c = closer_for(o);
    int depth = 0;
    for (std::size_t i = open; i < tokens.size(); ++i) {
        if (tokens[i].kind != lex::TokenKind::punctuation) continue;
        if (tokens[i].text == o) ++depth;
        else if (tokens[i].text == c && --depth == 0) return i;
    }
    return npos;
}

std::size_t match_backward(const std::vector<lex::Token>& tokens, std::size_t close) {
    const std::string_view c = tokens[close].text;
    const std::string_view o = opener_for(c);
    int depth = 0;
    for (std::size_t i = close + 1; i-- > 0;) {
        if (tokens[i].kind != lex::TokenKind::punctuation) continue;
        if (tokens[i].text == c) ++depth;
        else if (tokens[i].text == o && --depth == 0) return i;
    }
    return npos;
}

StructureScan find_functions(const std::vector<lex::Token>& tokens) {
    StructureScan scan;
    std::size_t stmt_start = 0;
    bool seen_assign = false;

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (t.kind != lex::TokenKind::punctuation) continue;
        if (t.text == ";") {
            stmt_start = i + 1;
            seen_assign = false;
        } else if (t.text == "=") {
            seen_assign = true;
        } else if (t.text == "(" || t.text == "[") {
            const std::size_t close = match_forward(tokens, i);
            if (close == npos) {
                scan.balanced = false;
                scan.error_line = t.line;
                return scan;
            }
            i = close;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
            scan.balanced = false;
            scan.error_line = t.line;
            return scan;
        } else if (t.text == "{") {
            const std::size_t close = match_forward(tokens, i);
            if (close == npos) {
                scan.balanced = false;
                scan.error_line = t.line;
                return scan;
            }
            bool is_function = false;
            if (!seen_assign && i > stmt_start && is_punct(tokens[i - 1], ")")) {
                const std::size_t open = match_backward(tokens, i - 1);
                if (open != npos && open > stmt_start &&
                    tokens[open - 1].kind == lex::TokenKind::word &&
                    !lex::is_c_keyword(tokens[open - 1].text)) {
                    FunctionExtent fn;
                    fn.name = tokens[open - 1].text;
                    fn.first_token = stmt_start;
                    fn.name_token = open - 1;
                    fn.open_paren = open;
                    fn.close_paren = i - 1;
                    fn.open_brace = i;
                    fn.close_brace = close;
                    scan.functions.push_back(std::move(fn));
                    is_function = true;
                }
            }
            i = close;
            if (is_function) {
                stmt_start = close + 1;
                seen_assign = false;
            }
        }
    }
    return scan;
}

}  // namespace fex::detail
