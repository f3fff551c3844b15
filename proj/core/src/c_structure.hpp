#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fex/lexer.hpp"

namespace fex::detail {

/// A top-level function definition located in a stream of code tokens.
/// Indices refer to the stream passed to find_functions.
struct FunctionExtent {
    std::string name;
    std::size_t first_token = 0;  // first token of the declaration (return type)
    std::size_t name_token = 0;
    std::size_t open_paren = 0;
    std::size_t close_paren = 0;
    std::size_t open_brace = 0;
    std::size_t close_brace = 0;
};

struct StructureScan {
    std::vector<FunctionExtent> functions;
    bool balanced = true;
    int error_line = 0;
};

/// Finds function definitions: a brace-balanced body at file scope that
/// follows `name(params)` with no `=` in the same top-level declaration.
/// `tokens` must contain code tokens only (no comment or directive tokens).
StructureScan find_functions(const std::vector<lex::Token>& tokens);

/// Code tokens of a lexed file: identifier-context tokens.
std::vector<lex::Token> code_tokens(const std::vector<lex::Token>& tokens);

/// Index of the bracket matching tokens[open] ("(", "[" or "{"), or npos.
std::size_t match_forward(const std::vector<lex::Token>& tokens, std::size_t open);

/// Index of the bracket matching tokens[close] (")", "]" or "}"), or npos.
std::size_t match_backward(const std::vector<lex::Token>& tokens, std::size_t close);

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace fex::detail
