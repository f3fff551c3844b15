#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fex/documents.hpp"
#include "fex/error.hpp"
#include "fex/lexer.hpp"
#include "fex/matrix.hpp"
#include "fex/project.hpp"

namespace fex {

enum class Weighting { raw_count, tfidf, log_normalized };

const char* to_string(Weighting w);
std::optional<Weighting> parse_weighting(std::string_view s);  // raw, tfidf, lognorm

/// Occurrence of a term. `file` indexes Corpus::files.
struct Location {
    std::uint32_t file = 0;
    int line = 1;
    int column = 1;
    lex::Context context = lex::Context::identifier;

    auto operator<=>(const Location&) const = default;
};

struct TermEntry {
    std::string term;
    std::vector<Location> locations;  // sorted by (file, line, column)
    int df = 0;

    bool operator==(const TermEntry&) const = default;
};

struct TdmEntry {
    std::uint32_t term = 0;
    std::uint32_t doc = 0;
    double weight = 0.0;

    bool operator==(const TdmEntry&) const = default;
};

struct FileRecord {
    std::string path;
    std::string hash;

    bool operator==(const FileRecord&) const = default;
};

/// Rank-k factorization of the TDM: tdm ~= u * diag(sigma) * v^T.
struct Reduction {
    int rank = 0;
    std::vector<double> sigma;
    DenseMatrix u;  // terms x rank
    DenseMatrix v;  // documents x rank

    bool operator==(const Reduction&) const = default;
};

/// Retrieval index over a project. Terms are sorted; the TDM is stored as
/// sparse (term, doc, weight) triplets sorted by term then document.
struct Corpus {
    std::string fingerprint;
    std::vector<FileRecord> files;
    std::vector<Document> documents;
    std::vector<TermEntry> terms;
    std::vector<TdmEntry> tdm;
    Weighting weighting = Weighting::log_normalized;
    bool keyword_filter = true;
    bool include_headers = true;
    std::optional<Reduction> reduction;

    std::optional<std::uint32_t> find_term(std::string_view term) const;
    double weight(std::uint32_t term, std::uint32_t doc) const;
    /// Document whose ranges contain (file, line), if any.
    std::optional<int> document_at(std::uint32_t file, int line) const;
    /// TDM as a dense terms x documents matrix.
    DenseMatrix dense_tdm() const;
    /// Per-document sparse columns (term index, weight), sorted by term.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> columns() const;

    bool operator==(const Corpus&) const = default;
};

struct BuildOptions {
    Weighting weighting = Weighting::log_normalized;
    bool keyword_filter = true;
    std::optional<int> reduction_rank;
};

/// Default rank used when LSI is requested without an explicit value.
int default_lsi_rank(const Corpus& corpus);

/// Rounds to 9 significant digits, the precision TDM weights are stored with.
double round_weight(double w);

Corpus build_corpus(const SourceProject& project, const BuildOptions& options = {},
                    Diagnostics* diagnostics = nullptr);

/// Returns a copy carrying the top-k singular triplets of the TDM. k above
/// min(#terms, #docs) or above the numerical rank is clamped with a
/// diagnostic; k <= 0 is a usage error.
Corpus reduce_lsi(const Corpus& corpus, int k, Diagnostics* diagnostics = nullptr);

/// Diagnostic when the corpus was not built from this exact project content.
std::optional<Diagnostic> check_fingerprint(const Corpus& corpus, const SourceProject& project);

}  // namespace fex
