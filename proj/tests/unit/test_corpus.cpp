#include <doctest.h>

#include <cctype>
#include <cmath>
#include <map>
#include <regex>

#include "fex/corpus.hpp"
#include "fex/corpus_io.hpp"
#include "fex/documents.hpp"
#include "fex/lexer.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace fex;

namespace {

Corpus fixture_corpus(Weighting w = Weighting::log_normalized) {
    BuildOptions o;
    o.weighting = w;
    return build_corpus(test::load_fixture("parse_command"), o);
}

double weight_of(const Corpus& c, const std::string& term, std::uint32_t doc = 0) {
    const auto t = c.find_term(term);
    REQUIRE_MESSAGE(t.has_value(), term);
    return c.weight(*t, doc);
}

}  // namespace

TEST_CASE("worked example: 21 terms in a single document") {
    const Corpus c = fixture_corpus();
    CHECK(c.documents.size() == 1);
    CHECK(c.documents[0].name == "parse_command");
    CHECK(c.terms.size() == 21);
}

TEST_CASE("worked example: log-normalized weights match an independent recount") {
    const std::string text = test::read_text(test::fixture_path("parse_command/parse_command.c"));
    const auto tf = test::oracle_tf(text);
    int max_tf = 0;
    for (const auto& [t, n] : tf) max_tf = std::max(max_tf, n);
    CHECK(max_tf == 9);
    const Corpus c = fixture_corpus();
    CHECK(c.terms.size() == tf.size());
    for (const auto& [t, n] : tf) CHECK_MESSAGE(weight_of(c, t) == doctest::Approx(test::oracle_lognorm(n, max_tf)).epsilon(1e-8), t);
}

TEST_CASE("worked example: reference weights within 0.01") {
    const Corpus c = fixture_corpus();
    const std::map<std::string, double> reference = {{"command", 1.00}, {"input", 0.78}, {"parse", 0.60},
                                                     {"move", 0.48},    {"unit", 0.48},  {"mode", 0.48}};
    for (const auto& [t, w] : reference) CHECK_MESSAGE(std::abs(weight_of(c, t) - w) <= 0.01, t);
    for (const char* t : {"move_y", "unsupported_command", "move_x", "fail", "coolant", "parse_axis_command", "null",
                          "do_command", "unsupported", "parse_unit", "mm", "inches", "parse_command"})
        CHECK_MESSAGE(std::abs(weight_of(c, t) - 0.30) <= 0.01, t);
}

TEST_CASE("worked example: reference locations") {
    const Corpus c = fixture_corpus();
    auto locs = [&](const std::string& term) {
        std::vector<std::string> out;
        for (const auto& l : c.terms[*c.find_term(term)].locations)
            out.push_back(std::to_string(l.line) + ":" + std::to_string(l.column) + ":" + lex::context_code(l.context));
        return out;
    };
    CHECK(locs("input") == std::vector<std::string>{"1:26:i", "3:7:i", "5:23:i", "7:26:i", "11:14:i"});
    CHECK(locs("mm") == std::vector<std::string>{"4:8:c"});
    CHECK(locs("inches") == std::vector<std::string>{"4:14:c"});
    CHECK(locs("fail") == std::vector<std::string>{"13:12:m"});
    CHECK(locs("unsupported_command") == std::vector<std::string>{"13:17:m"});
    CHECK(locs("mode") == std::vector<std::string>{"8:7:i", "15:16:i"});
    CHECK(locs("parse_command") == std::vector<std::string>{"1:6:i"});
}

TEST_CASE("background example: raw-count term-document matrix") {
    const SourceProject p = make_project({{"d1.c", "Time heals everything\n"}, {"d2.c", "Time cures everything\n"}});
    BuildOptions o;
    o.weighting = Weighting::raw_count;
    o.keyword_filter = true;
    const Corpus c = build_corpus(p, o);
    REQUIRE(c.documents.size() == 2);
    REQUIRE(c.terms.size() == 4);
    const std::map<std::string, std::pair<double, double>> expected = {
        {"time", {1, 1}}, {"heals", {1, 0}}, {"cures", {0, 1}}, {"everything", {1, 1}}};
    for (const auto& [t, row] : expected) {
        CHECK_MESSAGE(weight_of(c, t, 0) == row.first, t);
        CHECK_MESSAGE(weight_of(c, t, 1) == row.second, t);
    }
}

TEST_CASE("tfidf weights follow tf * ln(N/df)") {
    BuildOptions o;
    o.weighting = Weighting::tfidf;
    const SourceProject p = test::load_fixture("thermo");
    const Corpus c = build_corpus(p, o);
    const double n = static_cast<double>(c.documents.size());
    for (std::uint32_t t = 0; t < c.terms.size(); ++t) {
        const auto& e = c.terms[t];
        std::map<int, int> tf;
        for (const auto& l : e.locations) {
            const auto d = c.document_at(l.file, l.line);
            REQUIRE(d.has_value());
            ++tf[*d];
        }
        CHECK(static_cast<std::size_t>(e.df) == tf.size());
        for (const auto& [d, k] : tf) {
            const double expect = k * std::log(n / e.df);
            CHECK(c.weight(t, static_cast<std::uint32_t>(d)) == doctest::Approx(expect).epsilon(1e-8));
        }
    }
}

TEST_CASE("single-term single-document corpus has weight 1") {
    const Corpus c = build_corpus(make_project({{"one.c", "solitary\n"}}));
    REQUIRE(c.terms.size() == 1);
    CHECK(c.weight(0, 0) == 1.0);
}

TEST_CASE("empty project is an error") {
    CHECK_THROWS_AS(build_corpus(make_project({{"e.c", "; ; {}\n"}})), Error);
}

TEST_CASE("segmentation") {
    SUBCASE("file without functions") {
        const Corpus c = build_corpus(make_project({{"g.c", "int global_a;\nint global_b = 2;\n"}}));
        REQUIRE(c.documents.size() == 1);
        CHECK(c.documents[0].kind == DocumentKind::file_declarations);
    }
    SUBCASE("two functions and a global") {
        const Corpus c = build_corpus(
            make_project({{"f.c", "int shared = 1;\nint first(void) {\n  return shared;\n}\n"
                                  "int second(int a) {\n  return a + shared;\n}\n"}}));
        REQUIRE(c.documents.size() == 3);
        CHECK(c.documents[0].kind == DocumentKind::file_declarations);
        CHECK(c.documents[1].name == "first");
        CHECK(c.documents[1].span == LineSpan{2, 4});
        CHECK(c.documents[2].name == "second");
        CHECK(c.documents[2].span == LineSpan{5, 7});
    }
    SUBCASE("unbalanced braces fall back to one document") {
        Diagnostics ds;
        const Corpus c = build_corpus(make_project({{"u.c", "int f(void) {\n  if (x) {\n  return 1;\n}\n"}}), {}, &ds);
        REQUIRE(c.documents.size() == 1);
        CHECK(c.documents[0].kind == DocumentKind::file_declarations);
        CHECK_FALSE(ds.empty());
    }
}

TEST_CASE("corpus invariants on the synthetic project") {
    const SourceProject p = test::load_fixture("thermo");
    const Corpus c = build_corpus(p);
    const auto cols = c.columns();

    SUBCASE("dense ids in file then textual order") {
        for (std::size_t i = 0; i < c.documents.size(); ++i) CHECK(c.documents[i].id == static_cast<int>(i));
        for (std::size_t i = 1; i < c.documents.size(); ++i) {
            const auto& a = c.documents[i - 1];
            const auto& b = c.documents[i];
            CHECK((a.file < b.file || (a.file == b.file && a.span.first <= b.span.first)));
        }
    }
    SUBCASE("log-normalized weights in (0,1] with column maximum exactly 1") {
        for (const auto& col : cols) {
            if (col.empty()) continue;
            double mx = 0;
            for (const auto& [t, w] : col) {
                CHECK(w > 0.0);
                CHECK(w <= 1.0);
                mx = std::max(mx, w);
            }
            CHECK(mx == 1.0);
        }
    }
    SUBCASE("nonzero entry iff the term occurs in the document") {
        for (std::uint32_t t = 0; t < c.terms.size(); ++t) {
            std::set<int> docs;
            for (const auto& l : c.terms[t].locations) docs.insert(*c.document_at(l.file, l.line));
            for (std::uint32_t d = 0; d < c.documents.size(); ++d)
                CHECK((c.weight(t, d) > 0) == (docs.count(static_cast<int>(d)) > 0));
            CHECK(c.terms[t].df >= 1);
        }
    }
    SUBCASE("no keyword terms") {
        for (const auto& e : c.terms) CHECK_FALSE(lex::is_c_keyword(e.term));
        for (const auto& e : c.terms) CHECK(e.term != "_bool");
    }
    SUBCASE("locations sorted and faithful to the source text") {
        for (const auto& e : c.terms) {
            CHECK(std::is_sorted(e.locations.begin(), e.locations.end()));
            for (const auto& l : e.locations) {
                const auto lines = split_lines(p.files[l.file].text);
                const std::string& line = lines[static_cast<std::size_t>(l.line - 1)];
                std::size_t end = static_cast<std::size_t>(l.column - 1);
                while (end < line.size() && (std::isalnum(static_cast<unsigned char>(line[end])) || line[end] == '_'))
                    ++end;
                const std::string tok = test::lower(line.substr(static_cast<std::size_t>(l.column - 1), end - (l.column - 1)));
                CHECK_MESSAGE(tok.find(e.term) != std::string::npos, e.term << " at " << l.line << ":" << l.column);
            }
        }
    }
    SUBCASE("identifier locations lie in exactly one document") {
        for (const auto& e : c.terms)
            for (const auto& l : e.locations) {
                if (l.context != lex::Context::identifier) continue;
                int n = 0;
                for (const auto& d : c.documents)
                    if (d.file == c.files[l.file].path && d.covers(l.line)) ++n;
                CHECK(n == 1);
            }
    }
    SUBCASE("deterministic serialization") {
        CHECK(serialize_corpus(build_corpus(p)) == serialize_corpus(c));
    }
}

TEST_CASE("header files are optional") {
    const SourceProject with = make_project({{"a.c", "int alpha;\n"}, {"a.h", "int beta;\n"}}, true);
    const SourceProject without = make_project({{"a.c", "int alpha;\n"}, {"a.h", "int beta;\n"}}, false);
    CHECK(build_corpus(with).find_term("beta").has_value());
    CHECK_FALSE(build_corpus(without).find_term("beta").has_value());
}

TEST_CASE("LSI rank is clamped with a diagnostic") {
    const Corpus base = build_corpus(test::load_fixture("thermo"));
    Diagnostics ds;
    const Corpus r = reduce_lsi(base, 50, &ds);
    REQUIRE(r.reduction.has_value());
    CHECK(r.reduction->rank <= static_cast<int>(base.documents.size()));
    CHECK_FALSE(ds.empty());
    CHECK_THROWS_AS(reduce_lsi(base, 0), Error);
    CHECK(default_lsi_rank(base) == static_cast<int>(std::min(base.terms.size(), base.documents.size())));
}

TEST_CASE("fingerprint check flags edited sources") {
    const SourceProject p = test::load_fixture("parse_command");
    const Corpus c = build_corpus(p);
    CHECK_FALSE(check_fingerprint(c, p).has_value());
    SourceProject edited = p;
    edited.files[0].text += "\n";
    CHECK(check_fingerprint(c, edited).has_value());
}
