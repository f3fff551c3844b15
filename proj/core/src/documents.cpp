#include "fex/documents.hpp"

#include <algorithm>

#include "c_structure.hpp"

namespace fex {

bool Document::covers(int line) const {
    return std::any_of(ranges.begin(), ranges.end(), [line](const LineSpan& r) { return r.contains(line); });
}

const char* to_string(DocumentKind kind) {
    return kind == DocumentKind::function ? "function" : "declarations";
}

std::vector<Document> segment_documents(const SourceProject& project,
                                        const std::vector<std::vector<lex::Token>>& tokens_per_file,
                                        Diagnostics* diagnostics) {
    std::vector<Document> docs;
    for (std::size_t f = 0; f < project.files.size(); ++f) {
        const auto& file = project.files[f];
        const auto& tokens = tokens_per_file[f];
        if (tokens.empty()) continue;

        int last_line = 0;
        for (const auto& t : tokens) last_line = std::max(last_line, t.line);

        const auto code = detail::code_tokens(tokens);
        auto scan = detail::find_functions(code);
        if (!scan.balanced) {
            if (diagnostics)
                diagnostics->push_back({file.path, scan.error_line,
                                        "unbalanced brackets; file indexed as a single declarations document"});
            scan.functions.clear();
        }

        std::vector<Document> file_docs;
        std::vector<LineSpan> taken;
        for (const auto& fn : scan.functions) {
            Document d;
            d.kind = DocumentKind::function;
            d.name = fn.name;
            d.file = file.path;
            d.span = {code[fn.first_token].line, code[fn.close_brace].line};
            d.ranges = {d.span};
            taken.push_back(d.span);
            file_docs.push_back(std::move(d));
        }

        // Lines that carry any token and fall outside every function span.
        std::vector<LineSpan> rest;
        auto inside_function = [&](int line) {
            return std::any_of(taken.begin(), taken.end(), [line](const LineSpan& s) { return s.contains(line); });
        };
        std::vector<char> has_token(static_cast<std::size_t>(last_line) + 1, 0);
        for (const auto& t : tokens) has_token[static_cast<std::size_t>(t.line)] = 1;
        int run_start = 0;
        int run_last_token = 0;
        for (int line = 1; line <= last_line + 1; ++line) {
            const bool outside = line <= last_line && !inside_function(line);
            if (outside) {
                if (run_start == 0) run_start = line;
                if (has_token[static_cast<std::size_t>(line)]) run_last_token = line;
            } else if (run_start != 0) {
                if (run_last_token >= run_start) {
                    int first = run_start;
                    while (!has_token[static_cast<std::size_t>(first)]) ++first;
                    rest.push_back({first, run_last_token});
                }
                run_start = 0;
                run_last_token = 0;
            }
        }
        if (!rest.empty()) {
            Document d;
            d.kind = DocumentKind::file_declarations;
            d.name = file.path;
            d.file = file.path;
            d.span = {rest.front().first, rest.back().last};
            d.ranges = rest;
            file_docs.push_back(std::move(d));
        }
        std::sort(file_docs.begin(), file_docs.end(),
                  [](const Document& a, const Document& b) { return a.span.first < b.span.first; });
        for (auto& d : file_docs) {
            d.id = static_cast<int>(docs.size());
            docs.push_back(std::move(d));
        }
    }
    return docs;
}

}  // namespace fex
