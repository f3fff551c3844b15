#include "fex/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace fex {

std::string to_string(const Diagnostic& d) {
    std::string out;
    if (!d.file.empty()) {
        out += d.file;
        if (d.line > 0) out += ":" + std::to_string(d.line);
        out += ": ";
    }
    out += d.message;
    return out;
}

}  // namespace fex

namespace fex::lex {
namespace {

// C89 plus the five C99 additions.
constexpr std::array<std::string_view, 37> kKeywords = {
    "auto",     "break",    "case",     "char",    "const",    "continue", "default",
    "do",       "double",   "else",     "enum",    "extern",   "float",    "for",
    "goto",     "if",       "int",      "long",    "register", "return",   "short",
    "signed",   "sizeof",   "static",   "struct",  "switch",   "typedef",  "union",
    "unsigned", "void",     "volatile", "while",   "inline",   "restrict", "_Bool",
    "_Complex", "_Imaginary"};

constexpr std::array<std::string_view, 25> kPunctuators = {
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&",
    "||",  "*=",  "/=",  "%=", "+=", "-=", "&=", "^=", "|=", "##", "<:", ":>"};

bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::size_t utf8_length(unsigned char lead) {
    if (lead >= 0xF0) return 4;
    if (lead >= 0xE0) return 3;
    if (lead >= 0xC0) return 2;
    return 1;
}

// Shared scanner for tokenize() and scan_regions(): both walk the same state
// machine so comment and directive boundaries agree exactly.
class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    void run(std::vector<Token>* tokens, Regions* regions) {
        bool line_has_content = false;  // non-blank seen on the current line
        bool in_directive = false;
        int directive_start = 0;

        while (pos_ < text_.size()) {
            const char c = text_[pos_];

            if (c == '\n') {
                if (in_directive && !continued_) {
                    if (regions) regions->directives.emplace_back(directive_start, line_);
                    in_directive = false;
                }
                continued_ = false;
                advance();
                line_has_content = false;
                continue;
            }
            if (c == '\\' && peek(1) == '\n') {
                continued_ = true;
                advance();
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                advance();
                continue;
            }
            continued_ = false;

            if (c == '/' && peek(1) == '/') {
                line_comment(tokens, regions);
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                block_comment(tokens, regions);
                continue;
            }

            if (!line_has_content && c == '#' && !in_directive) {
                in_directive = true;
                directive_start = line_;
            }
            line_has_content = true;

            Token tok;
            tok.line = line_;
            tok.column = column_;
            tok.offset = pos_;
            if (is_word_start(c)) {
                const std::size_t begin = pos_;
                while (pos_ < text_.size() && is_word_char(text_[pos_])) advance();
                tok.text = std::string(text_.substr(begin, pos_ - begin));
                tok.kind = TokenKind::word;
                // Encoding prefixes: L"..", u8"..", u'..'
                if (pos_ < text_.size() && (text_[pos_] == '"' || text_[pos_] == '\'') &&
                    (tok.text == "L" || tok.text == "u" || tok.text == "U" || tok.text == "u8")) {
                    quoted(text_[pos_]);
                    tok.text = std::string(text_.substr(begin, pos_ - begin));
                    tok.kind = TokenKind::string_literal;
                }
            } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
                const std::size_t begin = pos_;
                while (pos_ < text_.size()) {
                    const char d = text_[pos_];
                    if (is_word_char(d) || d == '.') {
                        advance();
                    } else if ((d == '+' || d == '-') && pos_ > begin &&
                               (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E' ||
                                text_[pos_ - 1] == 'p' || text_[pos_ - 1] == 'P')) {
                        advance();
                    } else {
                        break;
                    }
                }
                tok.text = std::string(text_.substr(begin, pos_ - begin));
                tok.kind = TokenKind::number;
            } else if (c == '"' || c == '\'') {
                const std::size_t begin = pos_;
                quoted(c);
                tok.text = std::string(text_.substr(begin, pos_ - begin));
                tok.kind = TokenKind::string_literal;
            } else {
                tok.kind = TokenKind::punctuation;
                std::size_t len = 1;
                for (auto p : kPunctuators) {
                    if (text_.substr(pos_, p.size()) == p) {
                        len = p.size();
                        break;
                    }
                }
                if (static_cast<unsigned char>(c) >= 0x80)
                    len = std::min(utf8_length(static_cast<unsigned char>(c)), text_.size() - pos_);
                tok.text = std::string(text_.substr(pos_, len));
                for (std::size_t i = 0; i < len; ++i) advance();
            }
            if (tokens) tokens->push_back(std::move(tok));
        }
        if (in_directive && regions) regions->directives.emplace_back(directive_start, line_);
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    // String or character literal. Ends at the matching quote or, when
    // unterminated, before the newline.
    void quoted(char quote) {
        advance();
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '\\' && pos_ + 1 < text_.size()) {
                advance();
                advance();
                continue;
            }
            if (c == '\n') return;
            advance();
            if (c == quote) return;
        }
    }

    void comment_words(std::size_t end, std::vector<Token>* tokens) {
        while (pos_ < end) {
            const char c = text_[pos_];
            if (is_word_start(c)) {
                Token tok;
                tok.line = line_;
                tok.column = column_;
                tok.offset = pos_;
                const std::size_t begin = pos_;
                while (pos_ < end && is_word_char(text_[pos_])) advance();
                tok.text = std::string(text_.substr(begin, pos_ - begin));
                tok.kind = TokenKind::word;
                if (tokens) tokens->push_back(std::move(tok));
            } else if (is_digit(c)) {
                while (pos_ < end && is_word_char(text_[pos_])) advance();
            } else {
                advance();
            }
        }
    }

    void line_comment(std::vector<Token>* tokens, Regions* regions) {
        const std::size_t begin = pos_;
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        if (regions) regions->comments.emplace_back(begin, end);
        advance();
        advance();
        comment_words(end, tokens);
    }

    void block_comment(std::vector<Token>* tokens, Regions* regions) {
        const std::size_t begin = pos_;
        const int start_line = line_;
        std::size_t close = text_.find("*/", pos_ + 2);
        std::size_t end = 0;
        if (close == std::string_view::npos) {
            end = text_.size();
            if (regions) {
                regions->unterminated_comment = true;
                regions->unterminated_line = start_line;
            }
        } else {
            end = close + 2;
        }
        if (regions) regions->comments.emplace_back(begin, end);
        advance();
        advance();
        comment_words(end, tokens);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    bool continued_ = false;
};

}  // namespace

Regions scan_regions(std::string_view text) {
    Regions regions;
    Scanner(text).run(nullptr, &regions);
    return regions;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    Scanner(text).run(&tokens, nullptr);
    return tokens;
}

void classify_contexts(std::vector<Token>& tokens, std::string_view text,
                       Diagnostics* diagnostics, std::string_view file) {
    const Regions regions = scan_regions(text);
    if (regions.unterminated_comment && diagnostics) {
        diagnostics->push_back({std::string(file), regions.unterminated_line,
                                "unterminated block comment; remaining tokens treated as comment"});
    }

    auto in_comment = [&](std::size_t offset) {
        auto it = std::upper_bound(
            regions.comments.begin(), regions.comments.end(), offset,
            [](std::size_t off, const auto& range) { return off < range.first; });
        if (it == regions.comments.begin()) return false;
        --it;
        return offset >= it->first && offset < it->second;
    };
    // Index of the directive region containing `line`, or -1.
    auto directive_at = [&](int line) -> int {
        auto it = std::upper_bound(
            regions.directives.begin(), regions.directives.end(), line,
            [](int l, const auto& range) { return l < range.first; });
        if (it == regions.directives.begin()) return -1;
        --it;
        return line <= it->second ? static_cast<int>(it - regions.directives.begin()) : -1;
    };

    int current_directive = -1;
    int position_in_directive = 0;
    for (auto& tok : tokens) {
        tok.directive_name = false;
        if (in_comment(tok.offset)) {
            tok.context = Context::comment;
            continue;
        }
        const int directive = directive_at(tok.line);
        if (directive < 0) {
            tok.context = Context::identifier;
            continue;
        }
        tok.context = Context::macro;
        if (directive != current_directive) {
            current_directive = directive;
            position_in_directive = 0;
        }
        // '#' is token 0, the directive name token 1.
        if (position_in_directive == 1 && tok.kind == TokenKind::word) tok.directive_name = true;
        ++position_in_directive;
    }
}

std::vector<Token> lex_file(std::string_view text, Diagnostics* diagnostics, std::string_view file) {
    auto tokens = tokenize(text);
    classify_contexts(tokens, text, diagnostics, file);
    return tokens;
}

std::vector<LineClass> classify_lines(std::string_view text) {
    const Regions regions = scan_regions(text);
    std::vector<LineClass> out;
    std::size_t comment = 0;  // first comment region that may still matter
    std::size_t line_begin = 0;
    while (line_begin < text.size()) {
        std::size_t line_end = text.find('\n', line_begin);
        if (line_end == std::string_view::npos) line_end = text.size();
        LineClass lc;
        bool code = false;
        bool comment_text = false;
        for (std::size_t i = line_begin; i < line_end; ++i) {
            while (comment < regions.comments.size() && regions.comments[comment].second <= i) ++comment;
            const bool in_comment = comment < regions.comments.size() && i >= regions.comments[comment].first;
            const unsigned char c = static_cast<unsigned char>(text[i]);
            if (std::isspace(c)) continue;
            if (in_comment) comment_text = true;
            else code = true;
        }
        lc.blank = !code && !comment_text;
        lc.comment_only = !code && comment_text;
        while (comment < regions.comments.size() && regions.comments[comment].second <= line_end) ++comment;
        lc.ends_in_comment = comment < regions.comments.size() && regions.comments[comment].first < line_end &&
                             regions.comments[comment].second > line_end;
        out.push_back(lc);
        if (line_end == text.size()) break;
        line_begin = line_end + 1;
    }
    return out;
}

const char* to_string(Context c) {
    switch (c) {
        case Context::identifier: return "identifier";
        case Context::comment: return "comment";
        case Context::macro: return "macro";
    }
    return "identifier";
}

char context_code(Context c) {
    switch (c) {
        case Context::identifier: return 'i';
        case Context::comment: return 'c';
        case Context::macro: return 'm';
    }
    return 'i';
}

bool is_c_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

}  // namespace fex::lex
