#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "fex/corpus.hpp"
#include "fex/eval.hpp"
#include "fex/service.hpp"
#include "test_support.hpp"

using namespace fex;

namespace {

// One file of `n` code lines.
SourceProject code_project(int n) {
    std::string text;
    for (int i = 1; i <= n; ++i) text += "x" + std::to_string(i) + " = " + std::to_string(i) + ";\n";
    return make_project({{"m.c", text}});
}

LineSets span(int a, int b, const std::string& file = "m.c") {
    LineSets s;
    for (int i = a; i <= b; ++i) s[file].insert(i);
    return s;
}

TruthModule truth_of(const LineSets& s) {
    TruthModule t;
    t.name = "m";
    for (const auto& [file, lines] : s)
        for (int l : lines) t.ranges[file].push_back({l, l});
    return t;
}

LineSets merged(LineSets a, const LineSets& b) {
    for (const auto& [f, ls] : b) a[f].insert(ls.begin(), ls.end());
    return a;
}

// Truth = first c+m lines, slice = first c lines plus a lines past the truth.
EvalReport from_counts(int c, int a, int m) {
    const SourceProject p = code_project(c + m + a);
    const LineSets truth = span(1, c + m);
    const LineSets slice = merged(span(1, c), span(c + m + 1, c + m + a));
    return evaluate(slice, truth_of(truth), p);
}

}  // namespace

TEST_CASE("precision and recall from counts") {
    SUBCASE("273 correct, 115 additional, 28 missing") {
        const EvalReport r = from_counts(273, 115, 28);
        CHECK(line_total(r.correct) == 273);
        CHECK(line_total(r.additional) == 115);
        CHECK(line_total(r.missing) == 28);
        CHECK(std::abs(r.precision - 0.7036) <= 1e-4);
        CHECK(std::abs(r.recall - 0.9070) <= 1e-4);
        CHECK(std::abs(r.precision - 0.70360824742268) <= 1e-12);
        CHECK(std::abs(r.recall - 0.906976744186046) <= 1e-12);
    }
    SUBCASE("158 correct, 30 additional, 1 missing") {
        const EvalReport r = from_counts(158, 30, 1);
        CHECK(std::abs(r.precision - 0.8404) <= 1e-4);
        CHECK(std::abs(r.recall - 0.9937) <= 1e-4);
        CHECK(std::abs(r.precision - 0.840425531914894) <= 1e-12);
        CHECK(std::abs(r.recall - 0.993710691823899) <= 1e-12);
    }
}

TEST_CASE("identity and empty sets") {
    const SourceProject p = code_project(10);
    const EvalReport r = evaluate(span(2, 7), truth_of(span(2, 7)), p);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.missing.empty());
    CHECK(r.additional.empty());
    const EvalReport e = evaluate({}, truth_of({}), p);
    CHECK(e.precision == 0.0);
    CHECK(e.recall == 0.0);
    CHECK(precision_of(0, 0) == 0.0);
    CHECK(recall_of(0, 0) == 0.0);
}

TEST_CASE("comments and blanks are excluded from both sides") {
    const SourceProject p = make_project({{"c.c", "int a;\n\n/* note */\nint b; /* tail */\n// x\nint c;\n"}});
    const EvalReport r = evaluate(span(1, 6, "c.c"), truth_of(span(1, 4, "c.c")), p);
    CHECK(r.correct == LineSets{{"c.c", {1, 4}}});
    CHECK(r.additional == LineSets{{"c.c", {6}}});
    CHECK(r.missing.empty());
    CHECK(code_lines_only(span(1, 99, "c.c"), p) == LineSets{{"c.c", {1, 4, 6}}});
    CHECK(code_lines_only(span(1, 2, "other.c"), p).empty());
}

TEST_CASE("metric invariants on random sets") {
    std::mt19937 rng(7);
    const SourceProject p = code_project(60);
    for (int round = 0; round < 200; ++round) {
        LineSets slice, truth;
        for (int l = 1; l <= 60; ++l) {
            if (rng() % 3 == 0) slice["m.c"].insert(l);
            if (rng() % 3 == 0) truth["m.c"].insert(l);
        }
        const EvalReport r = evaluate(slice, truth_of(truth), p);
        CHECK(line_total(r.correct) + line_total(r.missing) == line_total(truth));
        CHECK(line_total(r.correct) + line_total(r.additional) == line_total(slice));
        CHECK(r.precision >= 0.0);
        CHECK(r.precision <= 1.0);
        CHECK(r.recall >= 0.0);
        CHECK(r.recall <= 1.0);
        const bool equal = slice == truth && !slice.empty();
        CHECK(equal == (r.precision == 1.0 && r.recall == 1.0));
        for (const auto& [f, ls] : r.correct)
            for (int l : ls) {
                CHECK_FALSE((r.missing.count(f) && r.missing.at(f).count(l)));
                CHECK_FALSE((r.additional.count(f) && r.additional.at(f).count(l)));
            }
    }
}

TEST_CASE("grep baseline") {
    const SourceProject fx = test::load_fixture("parse_command");
    CHECK(grep_baseline(fx, {"axis"}) == LineSets{{"parse_command.c", {2, 6, 7, 9, 10, 14}}});
    CHECK(grep_baseline(fx, {"AXIS"}) == grep_baseline(fx, {"axis"}));
    CHECK(grep_baseline(fx, {"zebra"}).empty());
    CHECK(grep_baseline(fx, {"inches"}).empty());  // comment-only line
    const SourceProject flags = make_project({{"f.c", "int stats_flag = 0;\n/* stats */\nint other;\n"}});
    CHECK(grep_baseline(flags, {"stats"}) == LineSets{{"f.c", {1}}});
    CHECK(grep_baseline(fx, {"axis", "mode"}) == grep_baseline(fx, {"mode", "axis"}));
    CHECK_THROWS_AS(grep_baseline(fx, {}), Error);
}

TEST_CASE("manifest format") {
    const std::string text =
        "FEXM 1\n"
        "# comment\n"
        "fingerprint -\n"
        "module a\n"
        "terms x,y\n"
        "note free text here\n"
        "range 1-3 m.c\n"
        "range 5-5 m.c\n"
        "end-module\n"
        "end\n";
    const GroundTruthManifest m = parse_manifest(text);
    REQUIRE(m.modules.size() == 1);
    CHECK(m.fingerprint.empty());
    CHECK(m.modules[0].terms == std::vector<std::string>{"x", "y"});
    CHECK(m.modules[0].notes == std::vector<std::string>{"free text here"});
    CHECK(m.modules[0].line_sets() == LineSets{{"m.c", {1, 2, 3, 5}}});
    CHECK(parse_manifest(format_manifest(m)).modules[0].line_sets() == m.modules[0].line_sets());
    CHECK(format_manifest(parse_manifest(format_manifest(m))) == format_manifest(m));
    CHECK(m.find("a") != nullptr);
    CHECK(m.find("b") == nullptr);

    for (const char* bad : {"", "FEXM 2\nend\n", "FEXM 1\nmodule a\n", "FEXM 1\nmodule a\nrange 3-1 m.c\nend-module\nend\n",
                            "FEXM 1\nmodule a\nrange 0-1 m.c\nend-module\nend\n",
                            "FEXM 1\nmodule a\nrange 1-4 m.c\nrange 3-5 m.c\nend-module\nend\n",
                            "FEXM 1\nbogus\nend\n"}) {
        CAPTURE(bad);
        try {
            parse_manifest(bad);
            FAIL("accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::data);
        }
    }
}

TEST_CASE("manifest fingerprint and module lookup") {
    const SourceProject p = test::load_fixture("thermo");
    const GroundTruthManifest m = load_manifest(test::fixture_path("thermo") / "truth.manifest");
    CHECK(m.fingerprint == project_fingerprint(p));
    CHECK(m.modules.size() == 3);
    CHECK_NOTHROW(evaluate({}, m, "sensor", p));
    CHECK_THROWS_AS(evaluate({}, m, "nope", p), Error);
    GroundTruthManifest stale = m;
    stale.fingerprint = "0000000000000000";
    try {
        evaluate({}, stale, "sensor", p);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
    }
    CHECK_THROWS_AS(load_manifest(test::fixture_path("thermo") / "missing.manifest"), Error);
}

TEST_CASE("thermo: fex recall is at least grep recall") {
    const SourceProject p = test::load_fixture("thermo");
    const Corpus corpus = build_corpus(p);
    const ProgramModel model = build_program_model(p);
    const GroundTruthManifest m = load_manifest(test::fixture_path("thermo") / "truth.manifest");
    for (const auto& mod : m.modules) {
        const Extraction ex = run_extraction(corpus, model, make_query(mod.terms, 0.85), Model::vsm, 2);
        LineSets slice;
        for (const auto& [f, ls] : ex.feature.lines) slice[f] = {ls.begin(), ls.end()};
        const EvalReport fex = evaluate(slice, m, mod.name, p, Tool::fex);
        const EvalReport grep = evaluate(grep_baseline(p, mod.terms), m, mod.name, p, Tool::grep);
        CAPTURE(mod.name);
        CHECK(fex.recall >= grep.recall);
        CHECK(fex.recall > 0.0);
    }
}

TEST_CASE("diff classification") {
    const char* src =
        "#define LIMIT 3\n"          // 1
        "int twice(int v);\n"        // 2
        "int helper(int n) {\n"      // 3
        "  return n * LIMIT;\n"      // 4
        "}\n"                        // 5
        "int run(int a) {\n"         // 6
        "  a = helper(a) +\n"        // 7
        "      twice(a);\n"          // 8
        "  a = a + 1;\n"             // 9
        "  return a;\n"              // 10
        "}\n";                       // 11
    const SourceProject p = make_project({{"k.c", src}});
    const ProgramModel model = build_program_model(p);
    SliceReport report;
    report.files["k.c"][4] = {Origin::call_def, 1};
    report.files["k.c"][6] = {Origin::seed, 0};
    EvalReport r;
    r.missing["k.c"] = {1, 2, 8, 9};
    r.additional["k.c"] = {4, 5};
    const DiffClassification d = classify_diff(r, report, model);
    CHECK(d.missing == std::vector<TaggedLine>{{"k.c", 1, "macro-related"},
                                               {"k.c", 2, "declaration-related"},
                                               {"k.c", 8, "multi-line"},
                                               {"k.c", 9, "data-dependence-gap"}});
    CHECK(d.additional == std::vector<TaggedLine>{{"k.c", 4, "call-def"}, {"k.c", 5, "grep-match"}});
    CHECK(d.missing_counts().at("macro-related") == 1);
    CHECK(d.additional_counts().at("call-def") == 1);
}

TEST_CASE("report output") {
    const EvalReport r = from_counts(273, 115, 28);
    EvalReport named = r;
    named.module = "parse";
    const std::string table = format_eval_table({named});
    CHECK(table.find("Precision") != std::string::npos);
    CHECK(table.find("70.36") != std::string::npos);
    CHECK(table.find("90.70") != std::string::npos);
    const auto json = nlohmann::json::parse(format_eval_json({named}));
    CHECK(json["format"] == "fex-eval");
    CHECK(json["reports"][0]["module"] == "parse");
    CHECK(json["reports"][0]["correct_count"] == 273);
    CHECK(std::abs(json["reports"][0]["precision"].get<double>() - 0.7036) <= 1e-4);
    const std::string csv = format_scatter_csv({named});
    CHECK(csv.rfind("precision,recall,label\n", 0) == 0);
    CHECK(csv.find("parse (fex)") != std::string::npos);
}
