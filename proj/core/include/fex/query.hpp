#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fex/corpus.hpp"
#include "fex/error.hpp"

namespace fex {

enum class Model { vsm, lsi };

const char* to_string(Model m);
std::optional<Model> parse_model(std::string_view s);

struct Query {
    std::vector<std::string> terms;  // lowercase, trimmed, non-empty, unique
    double threshold = 0.85;
};

/// Validates and normalizes a query. Throws a usage error for an empty term
/// list or a threshold outside [0, 1].
Query make_query(const std::vector<std::string>& terms, double threshold);

/// Splits "stats, stat" into its terms.
std::vector<std::string> split_terms(std::string_view comma_separated);

struct DocumentScore {
    int doc = 0;
    double score = 0.0;   // relative to the best-matching document
    double cosine = 0.0;  // raw cosine similarity
};

/// A source position with its path spelled out, as consumed by the slicer.
struct SeedLocation {
    std::string file;
    int line = 1;
    int column = 1;
    lex::Context context = lex::Context::identifier;

    auto operator<=>(const SeedLocation&) const = default;
};

struct CorpusSlice {
    Query query;
    Model model = Model::vsm;
    std::vector<DocumentScore> scores;    // every document, in id order
    std::vector<DocumentScore> retained;  // score >= threshold, in id order
    std::map<std::string, std::vector<SeedLocation>> related_terms;
    Diagnostics diagnostics;

    /// Union of related-term locations, sorted and duplicate free.
    std::vector<SeedLocation> seeds() const;
};

/// 1 at each term index equal to a query term, 0 elsewhere.
std::vector<double> build_query_vector(const Corpus& corpus, const Query& query);

/// Raw cosine of the query against every document. Under LSI the query is
/// folded in (q_k = inv(S_k) U_k^T q) and compared with the rank-k
/// reconstruction of each document column, which makes full-rank LSI agree
/// with VSM. Zero vectors score 0.
std::vector<double> cosine_scores(const Corpus& corpus, const std::vector<double>& query_vector, Model model);

/// Cosines divided by the largest positive cosine, so the best document
/// scores 1.0. When no cosine is positive the raw values are returned.
std::vector<double> score_documents(const Corpus& corpus, const std::vector<double>& query_vector, Model model);

CorpusSlice slice_corpus(const Corpus& corpus, const Query& query, Model model = Model::vsm);

/// Structured text report ("FEXQ 1"); doubles as the seed-file format.
std::string format_corpus_slice(const CorpusSlice& slice, const Corpus& corpus);

/// Reads seed locations from either a FEXQ report or grep-style lines
/// ("path:line[:column]:..."). Unparseable lines are reported as diagnostics.
std::vector<SeedLocation> parse_seed_file(std::string_view text, Diagnostics* diagnostics = nullptr);

}  // namespace fex
