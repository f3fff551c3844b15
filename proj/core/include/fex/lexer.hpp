#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fex/error.hpp"

namespace fex::lex {

enum class TokenKind { word, punctuation, string_literal, number };

/// Program context a token occurs in.
enum class Context { identifier, comment, macro };

struct Token {
    std::string text;
    int line = 1;
    int column = 1;
    std::size_t offset = 0;
    TokenKind kind = TokenKind::punctuation;
    Context context = Context::identifier;
    // First word after '#' on a directive line (define, include, ...).
    bool directive_name = false;
};

/// Comment byte ranges [begin, end) and preprocessor directive line ranges
/// (inclusive, continuation lines folded in).
struct Regions {
    std::vector<std::pair<std::size_t, std::size_t>> comments;
    std::vector<std::pair<int, int>> directives;
    bool unterminated_comment = false;
    int unterminated_line = 0;
};

Regions scan_regions(std::string_view text);

/// Lexes a C source file. Total: malformed input degrades to punctuation.
/// Word tokens inside comments are emitted; context is left as identifier
/// until classify_contexts runs.
std::vector<Token> tokenize(std::string_view text);

/// Annotates tokens with their context. An unterminated block comment turns
/// every following token into a comment token and records a diagnostic.
void classify_contexts(std::vector<Token>& tokens, std::string_view text,
                       Diagnostics* diagnostics = nullptr, std::string_view file = {});

/// tokenize + classify_contexts.
std::vector<Token> lex_file(std::string_view text, Diagnostics* diagnostics = nullptr,
                            std::string_view file = {});

/// Per physical line: whether it is blank, holds only comment text, and
/// whether it ends inside a block comment that continues on the next line.
struct LineClass {
    bool blank = true;
    bool comment_only = false;
    bool ends_in_comment = false;
};

/// One entry per line of split_lines(text), index 0 = line 1.
std::vector<LineClass> classify_lines(std::string_view text);

const char* to_string(Context c);
char context_code(Context c);  // i, c, m

bool is_c_keyword(std::string_view word);

}  // namespace fex::lex
