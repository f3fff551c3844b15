#pragma once

#include <string>
#include <vector>

#include "fex/error.hpp"
#include "fex/lexer.hpp"
#include "fex/project.hpp"

namespace fex {

struct LineSpan {
    int first = 0;
    int last = 0;

    bool contains(int line) const { return line >= first && line <= last; }
    bool operator==(const LineSpan&) const = default;
};

enum class DocumentKind { function, file_declarations };

/// IR unit: one function definition, or everything at file scope outside
/// function bodies. `span` is the overall extent; `ranges` the exact line
/// ranges owned by the document (one range for functions; the gaps between
/// functions for file-declarations documents).
struct Document {
    int id = 0;
    DocumentKind kind = DocumentKind::function;
    std::string name;
    std::string file;
    LineSpan span;
    std::vector<LineSpan> ranges;

    bool covers(int line) const;
    bool operator==(const Document&) const = default;
};

const char* to_string(DocumentKind kind);

/// Segments every file into documents. `tokens_per_file` is parallel to
/// `project.files` and holds lexed (context-classified) tokens. Ids are dense
/// in file order, then textual order.
std::vector<Document> segment_documents(const SourceProject& project,
                                        const std::vector<std::vector<lex::Token>>& tokens_per_file,
                                        Diagnostics* diagnostics = nullptr);

}  // namespace fex
