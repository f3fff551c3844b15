#include "fex/query.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "fex/normalize.hpp"

namespace fex {

const char* to_string(Model m) { return m == Model::lsi ? "lsi" : "vsm"; }

std::optional<Model> parse_model(std::string_view s) {
    if (s == "vsm") return Model::vsm;
    if (s == "lsi") return Model::lsi;
    return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string fmt_double(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::optional<int> to_int(std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::vector<std::string> split_terms(std::string_view comma_separated) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= comma_separated.size()) {
        std::size_t comma = comma_separated.find(',', pos);
        if (comma == std::string_view::npos) comma = comma_separated.size();
        const auto part = trim(comma_separated.substr(pos, comma - pos));
        if (!part.empty()) out.emplace_back(part);
        pos = comma + 1;
    }
    return out;
}

Query make_query(const std::vector<std::string>& terms, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw usage_error("threshold must be within [0, 1], got " + fmt_double(threshold, 6));
    Query q;
    q.threshold = threshold;
    for (const auto& t : terms) {
        auto term = to_lower(trim(t));
        if (term.empty()) continue;
        if (std::find(q.terms.begin(), q.terms.end(), term) == q.terms.end()) q.terms.push_back(std::move(term));
    }
    if (q.terms.empty()) throw usage_error("query needs at least one term");
    return q;
}

std::vector<SeedLocation> CorpusSlice::seeds() const {
    std::set<SeedLocation> all;
    for (const auto& [term, locs] : related_terms) all.insert(locs.begin(), locs.end());
    return {all.begin(), all.end()};
}

std::vector<double> build_query_vector(const Corpus& corpus, const Query& query) {
    std::vector<double> q(corpus.terms.size(), 0.0);
    for (const auto& t : query.terms)
        if (auto idx = corpus.find_term(t)) q[*idx] = 1.0;
    return q;
}

std::vector<double> cosine_scores(const Corpus& corpus, const std::vector<double>& q, Model model) {
    const std::size_t n_docs = corpus.documents.size();
    std::vector<double> out(n_docs, 0.0);
    double q_norm = 0.0;
    for (double x : q) q_norm += x * x;
    q_norm = std::sqrt(q_norm);
    if (q_norm == 0.0) return out;

    if (model == Model::vsm) {
        std::vector<double> dot(n_docs, 0.0), norm(n_docs, 0.0);
        for (const auto& e : corpus.tdm) {
            dot[e.doc] += q[e.term] * e.weight;
            norm[e.doc] += e.weight * e.weight;
        }
        for (std::size_t d = 0; d < n_docs; ++d)
            if (norm[d] > 0.0) out[d] = dot[d] / (q_norm * std::sqrt(norm[d]));
        return out;
    }

    if (!corpus.reduction) throw usage_error("corpus has no reduction; rebuild it with --lsi-rank");
    const auto& red = *corpus.reduction;
    const auto k = static_cast<std::size_t>(red.rank);
    // S q_k = U^T q
    std::vector<double> sq(k, 0.0);
    for (std::size_t t = 0; t < red.u.rows; ++t)
        if (q[t] != 0.0)
            for (std::size_t r = 0; r < k; ++r) sq[r] += red.u(t, r) * q[t];
    for (std::size_t d = 0; d < n_docs; ++d) {
        double dot = 0.0, norm = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            const double sv = red.sigma[r] * red.v(d, r);
            dot += sq[r] * sv;
            norm += sv * sv;
        }
        if (norm > 0.0) out[d] = std::clamp(dot / (q_norm * std::sqrt(norm)), -1.0, 1.0);
    }
    return out;
}

std::vector<double> score_documents(const Corpus& corpus, const std::vector<double>& q, Model model) {
    auto cos = cosine_scores(corpus, q, model);
    double best = 0.0;
    for (double c : cos) best = std::max(best, c);
    if (best <= 0.0) return cos;
    for (double& c : cos) c = std::clamp(c / best, -1.0, 1.0);
    return cos;
}

CorpusSlice slice_corpus(const Corpus& corpus, const Query& query, Model model) {
    CorpusSlice slice;
    slice.query = query;
    slice.model = model;
    const auto q = build_query_vector(corpus, query);
    const auto cos = cosine_scores(corpus, q, model);
    const auto rel = score_documents(corpus, q, model);
    for (std::size_t d = 0; d < cos.size(); ++d) {
        DocumentScore s{static_cast<int>(d), rel[d], cos[d]};
        slice.scores.push_back(s);
        if (s.score >= query.threshold && s.score > 0.0) slice.retained.push_back(s);
    }
    if (slice.retained.empty()) {
        slice.diagnostics.push_back(
            {"", 0, "no document scored at or above threshold " + fmt_double(query.threshold, 6) +
                        "; try a lower threshold or other terms"});
        return slice;
    }

    std::vector<const Document*> kept;
    for (const auto& s : slice.retained) kept.push_back(&corpus.documents[static_cast<std::size_t>(s.doc)]);
    auto inside_retained = [&](const std::string& file, int line) {
        return std::any_of(kept.begin(), kept.end(),
                           [&](const Document* d) { return d->file == file && d->covers(line); });
    };

    for (const auto& entry : corpus.terms) {
        const bool related = std::any_of(query.terms.begin(), query.terms.end(), [&](const std::string& t) {
            return entry.term.find(t) != std::string::npos;
        });
        if (!related) continue;
        std::vector<SeedLocation> locs;
        for (const auto& l : entry.locations) {
            if (l.context == lex::Context::comment) continue;
            const auto& file = corpus.files[l.file].path;
            if (!inside_retained(file, l.line)) continue;
            locs.push_back({file, l.line, l.column, l.context});
        }
        if (!locs.empty()) slice.related_terms.emplace(entry.term, std::move(locs));
    }
    return slice;
}

std::string format_corpus_slice(const CorpusSlice& slice, const Corpus& corpus) {
    std::ostringstream out;
    out << "FEXQ 1\n";
    out << "terms";
    for (const auto& t : slice.query.terms) out << ' ' << t;
    out << "\nthreshold " << fmt_double(slice.query.threshold, 9) << '\n';
    out << "model " << to_string(slice.model) << '\n';
    out << "documents " << slice.retained.size() << '\n';
    for (const auto& s : slice.retained)
        out << s.doc << ' ' << fmt_double(s.score, 9) << ' ' << fmt_double(s.cosine, 9) << ' '
            << corpus.documents[static_cast<std::size_t>(s.doc)].name << '\n';
    out << "related " << slice.related_terms.size() << '\n';
    for (const auto& [term, locs] : slice.related_terms) {
        out << term << ' ' << locs.size();
        for (const auto& l : locs)
            out << ' ' << l.file << ':' << l.line << ':' << l.column << ':' << lex::context_code(l.context);
        out << '\n';
    }
    out << "end\n";
    return out.str();
}

namespace {

// "path:line:col:ctx" parsed from the right so paths may contain ':'.
std::optional<SeedLocation> parse_report_location(std::string_view s) {
    const auto c3 = s.rfind(':');
    if (c3 == std::string_view::npos || c3 == 0) return std::nullopt;
    const auto c2 = s.rfind(':', c3 - 1);
    if (c2 == std::string_view::npos || c2 == 0) return std::nullopt;
    const auto c1 = s.rfind(':', c2 - 1);
    if (c1 == std::string_view::npos || c1 == 0) return std::nullopt;
    SeedLocation loc;
    loc.file = std::string(s.substr(0, c1));
    const auto line = to_int(s.substr(c1 + 1, c2 - c1 - 1));
    const auto col = to_int(s.substr(c2 + 1, c3 - c2 - 1));
    const auto ctx = s.substr(c3 + 1);
    if (!line || !col || *line < 1 || *col < 1 || ctx.size() != 1) return std::nullopt;
    loc.line = *line;
    loc.column = *col;
    if (ctx == "i") loc.context = lex::Context::identifier;
    else if (ctx == "m") loc.context = lex::Context::macro;
    else if (ctx == "c") loc.context = lex::Context::comment;
    else return std::nullopt;
    return loc;
}

}  // namespace

std::vector<SeedLocation> parse_seed_file(std::string_view text, Diagnostics* diagnostics) {
    std::set<SeedLocation> seeds;
    const auto lines = split_lines(text);
    const bool report = !lines.empty() && lines.front().rfind("FEXQ ", 0) == 0;
    bool in_related = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = lines[i];
        const int number = static_cast<int>(i) + 1;
        auto bad = [&](const std::string& what) {
            if (diagnostics) diagnostics->push_back({"<seeds>", number, what});
        };
        if (report) {
            if (line.rfind("related ", 0) == 0) {
                in_related = true;
                continue;
            }
            if (line == "end") break;
            if (!in_related) continue;
            std::istringstream in{std::string(line)};
            std::string term, loc;
            std::size_t n = 0;
            in >> term >> n;
            while (in >> loc) {
                if (auto l = parse_report_location(loc)) {
                    if (l->context != lex::Context::comment) seeds.insert(*l);
                } else {
                    bad("malformed location '" + loc + "'");
                }
            }
            continue;
        }
        if (trim(line).empty()) continue;
        // grep style: path:line[:column][:text]
        const auto c1 = line.find(':');
        if (c1 == std::string_view::npos) {
            bad("expected path:line");
            continue;
        }
        std::string_view path = line.substr(0, c1);
        if (path.substr(0, 2) == "./") path.remove_prefix(2);
        const auto rest = line.substr(c1 + 1);
        const auto c2 = rest.find(':');
        const auto line_no = to_int(rest.substr(0, c2));
        if (!line_no || *line_no < 1 || path.empty()) {
            bad("expected path:line");
            continue;
        }
        SeedLocation loc{std::string(path), *line_no, 1, lex::Context::identifier};
        if (c2 != std::string_view::npos) {
            const auto after = rest.substr(c2 + 1);
            const auto c3 = after.find(':');
            if (c3 != std::string_view::npos)
                if (auto col = to_int(after.substr(0, c3)); col && *col >= 1) loc.column = *col;
        }
        seeds.insert(std::move(loc));
    }
    return {seeds.begin(), seeds.end()};
}

}  // namespace fex
