#include "fex/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "fex/normalize.hpp"

namespace fex {

const char* to_string(Weighting w) {
    switch (w) {
        case Weighting::raw_count: return "raw";
        case Weighting::tfidf: return "tfidf";
        case Weighting::log_normalized: return "lognorm";
    }
    return "lognorm";
}

std::optional<Weighting> parse_weighting(std::string_view s) {
    if (s == "raw") return Weighting::raw_count;
    if (s == "tfidf") return Weighting::tfidf;
    if (s == "lognorm") return Weighting::log_normalized;
    return std::nullopt;
}

std::optional<std::uint32_t> Corpus::find_term(std::string_view term) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), term,
                               [](const TermEntry& e, std::string_view t) { return e.term < t; });
    if (it == terms.end() || it->term != term) return std::nullopt;
    return static_cast<std::uint32_t>(it - terms.begin());
}

double Corpus::weight(std::uint32_t term, std::uint32_t doc) const {
    auto it = std::lower_bound(tdm.begin(), tdm.end(), std::pair{term, doc},
                               [](const TdmEntry& e, std::pair<std::uint32_t, std::uint32_t> key) {
                                   return std::pair{e.term, e.doc} < key;
                               });
    if (it == tdm.end() || it->term != term || it->doc != doc) return 0.0;
    return it->weight;
}

std::optional<int> Corpus::document_at(std::uint32_t file, int line) const {
    if (file >= files.size()) return std::nullopt;
    const auto& path = files[file].path;
    for (const auto& d : documents)
        if (d.file == path && d.covers(line)) return d.id;
    return std::nullopt;
}

DenseMatrix Corpus::dense_tdm() const {
    DenseMatrix a(terms.size(), documents.size());
    for (const auto& e : tdm) a(e.term, e.doc) = e.weight;
    return a;
}

std::vector<std::vector<std::pair<std::uint32_t, double>>> Corpus::columns() const {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> cols(documents.size());
    for (const auto& e : tdm) cols[e.doc].emplace_back(e.term, e.weight);
    return cols;
}

int default_lsi_rank(const Corpus& corpus) {
    const int full = static_cast<int>(std::min(corpus.terms.size(), corpus.documents.size()));
    return std::min(300, full);
}

double round_weight(double w) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", w);
    return std::strtod(buf, nullptr);
}

namespace {

bool is_filtered_keyword(std::string_view term) {
    static const std::vector<std::string> lowered = [] {
        std::vector<std::string> out;
        for (auto kw : {"auto", "break", "case", "char", "const", "continue", "default", "do", "double",
                        "else", "enum", "extern", "float", "for", "goto", "if", "int", "long", "register",
                        "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
                        "union", "unsigned", "void", "volatile", "while", "inline", "restrict", "_Bool",
                        "_Complex", "_Imaginary"})
            out.push_back(to_lower(kw));
        return out;
    }();
    return std::find(lowered.begin(), lowered.end(), term) != lowered.end();
}

struct TermAccumulator {
    std::vector<Location> locations;
    std::map<std::uint32_t, int> tf;  // doc -> count
};

}  // namespace

Corpus build_corpus(const SourceProject& project, const BuildOptions& options, Diagnostics* diagnostics) {
    Corpus corpus;
    corpus.weighting = options.weighting;
    corpus.keyword_filter = options.keyword_filter;
    corpus.include_headers = project.include_headers;
    corpus.fingerprint = project_fingerprint(project);

    std::vector<std::vector<lex::Token>> tokens(project.files.size());
    for (std::size_t f = 0; f < project.files.size(); ++f) {
        const auto& file = project.files[f];
        corpus.files.push_back({file.path, content_hash(file.text)});
        tokens[f] = lex::lex_file(file.text, diagnostics, file.path);
    }
    corpus.documents = segment_documents(project, tokens, diagnostics);

    // line -> document lookup per file
    std::vector<std::vector<int>> doc_of_line(project.files.size());
    for (std::size_t f = 0; f < project.files.size(); ++f) {
        int last = 0;
        for (const auto& t : tokens[f]) last = std::max(last, t.line);
        doc_of_line[f].assign(static_cast<std::size_t>(last) + 1, -1);
    }
    for (const auto& d : corpus.documents) {
        const auto f = static_cast<std::size_t>(
            std::find_if(project.files.begin(), project.files.end(),
                         [&](const SourceFile& s) { return s.path == d.file; }) -
            project.files.begin());
        for (const auto& r : d.ranges)
            for (int line = r.first; line <= r.last && line < static_cast<int>(doc_of_line[f].size()); ++line)
                doc_of_line[f][static_cast<std::size_t>(line)] = d.id;
    }

    std::map<std::string, TermAccumulator> acc;
    for (std::size_t f = 0; f < project.files.size(); ++f) {
        for (const auto& tok : tokens[f]) {
            if (tok.kind != lex::TokenKind::word || tok.directive_name) continue;
            const int doc = doc_of_line[f][static_cast<std::size_t>(tok.line)];
            if (doc < 0) continue;
            for (auto& term : normalize(tok.text)) {
                if (options.keyword_filter && is_filtered_keyword(term)) continue;
                auto& a = acc[term];
                a.locations.push_back({static_cast<std::uint32_t>(f), tok.line, tok.column, tok.context});
                ++a.tf[static_cast<std::uint32_t>(doc)];
            }
        }
    }
    if (acc.empty()) throw data_error("empty corpus: no terms found in " + project.root.string());

    std::vector<int> max_tf(corpus.documents.size(), 0);
    for (const auto& [term, a] : acc)
        for (const auto& [doc, tf] : a.tf) max_tf[doc] = std::max(max_tf[doc], tf);

    const double n_docs = static_cast<double>(corpus.documents.size());
    std::uint32_t index = 0;
    for (auto& [term, a] : acc) {
        TermEntry entry;
        entry.term = term;
        entry.locations = std::move(a.locations);
        std::sort(entry.locations.begin(), entry.locations.end());
        entry.df = static_cast<int>(a.tf.size());
        for (const auto& [doc, tf] : a.tf) {
            double w = 0.0;
            switch (options.weighting) {
                case Weighting::raw_count:
                    w = tf;
                    break;
                case Weighting::tfidf:
                    w = tf * std::log(n_docs / entry.df);
                    break;
                case Weighting::log_normalized:
                    w = std::log10(1.0 + tf) / std::log10(1.0 + max_tf[doc]);
                    break;
            }
            w = round_weight(w);
            if (w > 0.0) corpus.tdm.push_back({index, doc, w});
        }
        corpus.terms.push_back(std::move(entry));
        ++index;
    }

    if (options.reduction_rank) {
        int k = *options.reduction_rank;
        const int full = static_cast<int>(std::min(corpus.terms.size(), corpus.documents.size()));
        if (k > full) {
            if (diagnostics)
                diagnostics->push_back({"", 0, "LSI rank " + std::to_string(k) + " clamped to " +
                                                   std::to_string(full) + " (min of terms and documents)"});
            k = full;
        }
        corpus = reduce_lsi(corpus, k, diagnostics);
    }
    return corpus;
}

Corpus reduce_lsi(const Corpus& corpus, int k, Diagnostics* diagnostics) {
    if (k <= 0) throw usage_error("LSI rank must be positive, got " + std::to_string(k));
    const int full = static_cast<int>(std::min(corpus.terms.size(), corpus.documents.size()));
    if (k > full) {
        if (diagnostics)
            diagnostics->push_back({"", 0, "LSI rank " + std::to_string(k) + " clamped to " + std::to_string(full)});
        k = full;
    }
    const SvdResult svd = thin_svd(corpus.dense_tdm());
    const int rank = static_cast<int>(svd.sigma.size());
    if (k > rank) {
        if (diagnostics)
            diagnostics->push_back({"", 0, "LSI rank " + std::to_string(k) + " clamped to numerical rank " +
                                               std::to_string(rank)});
        k = rank;
    }
    if (k <= 0) throw data_error("term-document matrix is zero; cannot build an LSI reduction");

    Corpus out = corpus;
    Reduction red;
    red.rank = k;
    red.sigma.assign(svd.sigma.begin(), svd.sigma.begin() + k);
    red.u = DenseMatrix(svd.u.rows, static_cast<std::size_t>(k));
    red.v = DenseMatrix(svd.v.rows, static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < svd.u.rows; ++i)
        for (int r = 0; r < k; ++r) red.u(i, static_cast<std::size_t>(r)) = svd.u(i, static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < svd.v.rows; ++i)
        for (int r = 0; r < k; ++r) red.v(i, static_cast<std::size_t>(r)) = svd.v(i, static_cast<std::size_t>(r));
    out.reduction = std::move(red);
    return out;
}

std::optional<Diagnostic> check_fingerprint(const Corpus& corpus, const SourceProject& project) {
    const std::string actual = project_fingerprint(project);
    if (actual == corpus.fingerprint) return std::nullopt;
    return Diagnostic{"", 0,
                      "project fingerprint " + actual + " does not match corpus fingerprint " +
                          corpus.fingerprint + "; the corpus may be stale"};
}

}  // namespace fex
