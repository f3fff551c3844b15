// One PASS/FAIL line per primary acceptance criterion. Exit status is the
// number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "fex/corpus.hpp"
#include "fex/corpus_io.hpp"
#include "fex/eval.hpp"
#include "fex/matrix.hpp"
#include "fex/query.hpp"
#include "fex/service.hpp"
#include "fex/slicer.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace fex;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects failed expectations for one criterion.
class Outcome {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void note(const std::string& s) { notes_.push_back(s); }
    bool passed() const { return failures_.empty(); }
    std::string detail() const {
        std::string out;
        const auto& items = failures_.empty() ? notes_ : failures_;
        for (std::size_t i = 0; i < items.size() && i < 5; ++i) out += (i ? "; " : "") + items[i];
        if (items.size() > 5) out += "; +" + std::to_string(items.size() - 5) + " more";
        return out;
    }

private:
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

int cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "fex");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Extraction extract(const Corpus& c, const ProgramModel& m, const std::vector<std::string>& terms, double t, int ipd) {
    return run_extraction(c, m, make_query(terms, t), Model::vsm, ipd);
}

bool lines_subset(const std::map<std::string, std::vector<int>>& a, const std::map<std::string, std::vector<int>>& b) {
    for (const auto& [f, ls] : a) {
        const auto it = b.find(f);
        if (it == b.end()) {
            if (!ls.empty()) return false;
            continue;
        }
        if (!std::includes(it->second.begin(), it->second.end(), ls.begin(), ls.end())) return false;
    }
    return true;
}

// ---- criteria ----------------------------------------------------------------

void worked_example(Outcome& o) {
    test::TempDir dir("accept-slice");
    const auto t0 = Clock::now();
    const int code = cli_run({"slice", test::fixture_path("parse_command").string(), "-t", "axis", "-s", "0.85",
                              "--ipd", "2", "-o", (dir.path() / "out").string()});
    const double secs = seconds_since(t0);
    o.expect(code == 0, "exit code " + std::to_string(code));
    if (code != 0) return;
    const auto sets = read_slice_report(dir.path() / "out").line_sets();
    const std::set<int> want = {1, 2, 3, 6, 7, 8, 9, 10, 11, 14, 15, 16, 18};
    const std::set<int> got = sets.count("parse_command.c") ? sets.at("parse_command.c") : std::set<int>{};
    o.expect(sets.size() == 1 && got == want, "lines " + test::show(got));
    o.expect(secs < 1.0, "runtime " + fixed(secs, 3) + " s");
    o.note("13 lines, " + fixed(secs * 1000.0, 1) + " ms");
}

void weights(Outcome& o) {
    const SourceProject p = test::load_fixture("parse_command");
    const Corpus c = build_corpus(p);
    const auto w = [&](const std::string& t) {
        const auto id = c.find_term(t);
        return id ? c.weight(*id, 0) : -1.0;
    };
    // Independent recount first.
    const auto tf = test::oracle_tf(p.files[0].text);
    int max_tf = 0;
    for (const auto& [t, n] : tf) max_tf = std::max(max_tf, n);
    o.expect(tf.size() == c.terms.size(), "term count " + std::to_string(c.terms.size()) + " vs oracle " +
                                              std::to_string(tf.size()));
    for (const auto& [t, n] : tf)
        o.expect(std::abs(w(t) - test::oracle_lognorm(n, max_tf)) <= 1e-8, "oracle mismatch for " + t);
    const std::map<std::string, double> reference = {{"command", 1.00}, {"input", 0.78}, {"parse", 0.60},
                                                     {"move", 0.48},    {"unit", 0.48},  {"mode", 0.48}};
    for (const auto& [t, v] : reference) o.expect(std::abs(w(t) - v) <= 0.01, t + " = " + fixed(w(t), 4));
    int tf1 = 0;
    for (const auto& [t, n] : tf) {
        if (n != 1) continue;
        ++tf1;
        o.expect(std::abs(w(t) - 0.30) <= 0.01, t + " = " + fixed(w(t), 4));
    }
    o.note(std::to_string(reference.size()) + " reference rows and " + std::to_string(tf1) + " tf=1 rows");
}

void background_tdm(Outcome& o) {
    const SourceProject p = make_project({{"d1.c", "Time heals everything\n"}, {"d2.c", "Time cures everything\n"}});
    BuildOptions opt;
    opt.weighting = Weighting::raw_count;
    const Corpus c = build_corpus(p, opt);
    o.expect(c.documents.size() == 2, "documents " + std::to_string(c.documents.size()));
    o.expect(c.terms.size() == 4, "terms " + std::to_string(c.terms.size()));
    const std::map<std::string, std::pair<double, double>> table = {
        {"time", {1, 1}}, {"heals", {1, 0}}, {"cures", {0, 1}}, {"everything", {1, 1}}};
    for (const auto& [t, row] : table) {
        const auto id = c.find_term(t);
        o.expect(id.has_value(), "missing term " + t);
        if (!id) continue;
        o.expect(c.weight(*id, 0) == row.first && c.weight(*id, 1) == row.second, "row " + t);
    }
    o.note("2x4 raw counts");
}

void query_semantics(Outcome& o) {
    const Corpus c = build_corpus(test::load_fixture("parse_command"));
    const CorpusSlice s = slice_corpus(c, make_query({"axis"}, 0.85));
    o.expect(s.scores.size() == 1 && std::abs(s.scores[0].score - 1.0) <= 1e-6, "score");
    std::set<std::string> related;
    for (const auto& [t, locs] : s.related_terms) related.insert(t);
    o.expect(related == std::set<std::string>{"axis", "axis_command", "parse_axis_command"}, "related terms");
    o.note("score " + fixed(s.scores.empty() ? 0.0 : s.scores[0].score, 6) + ", 3 related terms");
}

EvalReport from_counts(int correct, int additional, int missing) {
    std::string text;
    const int n = correct + additional + missing;
    for (int i = 1; i <= n; ++i) text += "v" + std::to_string(i) + " = 0;\n";
    const SourceProject p = make_project({{"m.c", text}});
    TruthModule truth;
    truth.name = "m";
    truth.ranges["m.c"] = {{1, correct + missing}};
    LineSets slice;
    for (int i = 1; i <= correct; ++i) slice["m.c"].insert(i);
    for (int i = correct + missing + 1; i <= n; ++i) slice["m.c"].insert(i);
    return evaluate(slice, truth, p);
}

void metrics(Outcome& o) {
    struct Row {
        int c, a, m;
        double precision, recall;
    };
    for (const Row& r : {Row{273, 115, 28, 0.7036, 0.9070}, Row{158, 30, 1, 0.8404, 0.9937}}) {
        const EvalReport e = from_counts(r.c, r.a, r.m);
        const std::string tag = "(" + std::to_string(r.c) + "," + std::to_string(r.a) + "," + std::to_string(r.m) + ")";
        o.expect(std::abs(e.precision - r.precision) <= 1e-4, tag + " precision " + fixed(e.precision, 6));
        o.expect(std::abs(e.recall - r.recall) <= 1e-4, tag + " recall " + fixed(e.recall, 6));
        o.note(tag + " -> " + fixed(e.precision, 4) + "/" + fixed(e.recall, 4));
    }
}

void thermo_suite(Outcome& o) {
    const auto t0 = Clock::now();
    const SourceProject p = test::load_fixture("thermo");
    const Corpus c = build_corpus(p);
    const ProgramModel m = build_program_model(p);
    const GroundTruthManifest truth = load_manifest(test::fixture_path("thermo") / "truth.manifest");
    o.expect(p.files.size() == 3 && m.functions.size() == 6, "fixture shape");

    // Recall against grep.
    for (const auto& mod : truth.modules) {
        const Extraction ex = extract(c, m, mod.terms, 0.85, 2);
        LineSets slice;
        for (const auto& [f, ls] : ex.feature.lines) slice[f] = {ls.begin(), ls.end()};
        const EvalReport fex = evaluate(slice, truth, mod.name, p, Tool::fex);
        const EvalReport grep = evaluate(grep_baseline(p, mod.terms), truth, mod.name, p, Tool::grep);
        o.expect(fex.recall >= grep.recall, mod.name + " recall " + fixed(fex.recall, 4) + " < grep " +
                                                fixed(grep.recall, 4));
        o.note(mod.name + " " + fixed(fex.recall * 100, 1) + "% vs " + fixed(grep.recall * 100, 1) + "%");
    }

    const std::vector<std::vector<std::string>> queries = {
        {"temperature"}, {"sensor"}, {"display"}, {"display", "dim"}, {"value"}, {"brightness"}, {"offset"}};

    // Threshold and ipd monotonicity, brace balance, determinism.
    for (const auto& q : queries) {
        std::map<std::string, std::vector<int>> prev;
        bool first = true;
        for (double t : {0.95, 0.85, 0.7, 0.5, 0.2, 0.0}) {
            const Extraction ex = extract(c, m, q, t, 2);
            if (!first) o.expect(lines_subset(prev, ex.feature.lines), "threshold monotonicity " + q[0]);
            for (const auto& [f, text] : ex.feature.rendered)
                o.expect(test::brackets_balanced(text), "unbalanced " + f + " for " + q[0]);
            prev = ex.feature.lines;
            first = false;
        }
        for (int ipd = 0; ipd < 3; ++ipd) {
            const auto a = extract(c, m, q, 0.85, ipd).feature.lines;
            const auto b = extract(c, m, q, 0.85, ipd + 1).feature.lines;
            o.expect(lines_subset(a, b), "ipd monotonicity " + q[0] + " at " + std::to_string(ipd));
        }
        const Extraction a = extract(c, m, q, 0.85, 2), b = extract(c, m, q, 0.85, 2);
        o.expect(a.feature.rendered == b.feature.rendered &&
                     format_slice_report(a.feature, a.provenance) == format_slice_report(b.feature, b.provenance),
                 "slice determinism " + q[0]);
    }

    // Closure soundness from every statement as a single seed.
    for (const auto& s : m.statements) {
        if (s.function.empty()) continue;
        const FeatureSlice fs = extract_feature(m, {{s.file, s.lines.first, 1}}, {});
        for (const auto& [id, mark] : fs.state.relevant) {
            const Statement& st = m.statements[static_cast<std::size_t>(id)];
            const std::string where = st.file + ":" + std::to_string(st.lines.first);
            if (!st.is_structural() && st.kind != StatementKind::macro_directive)
                for (const auto& v : st.var_uses)
                    for (int d : resolve_definitions(m, id, v).all())
                        o.expect(fs.state.contains(d), "unsound data dependence at " + where);
            for (int b = st.block; b >= 0; b = m.blocks[static_cast<std::size_t>(b)].parent) {
                const Block& blk = m.blocks[static_cast<std::size_t>(b)];
                for (int x : {blk.open_stmt, blk.close_stmt, blk.controlling_stmt})
                    o.expect(x < 0 || fs.state.contains(x), "incomplete block at " + where);
            }
        }
        for (const auto& [f, text] : fs.rendered) o.expect(test::brackets_balanced(text), "unbalanced " + f);
    }

    // Corpus determinism and save/load identity.
    const std::string serialized = serialize_corpus(c);
    o.expect(serialize_corpus(build_corpus(p)) == serialized, "corpus determinism");
    test::TempDir dir("accept-corpus");
    save_corpus(c, dir.path() / "c.fexc");
    const Corpus loaded = load_corpus(dir.path() / "c.fexc");
    o.expect(loaded == c && serialize_corpus(loaded) == serialized, "save/load round trip");

    // Full-rank LSI agrees with VSM; SVD factors are orthonormal.
    const Corpus full = reduce_lsi(c, static_cast<int>(std::min(c.terms.size(), c.documents.size())));
    const Corpus loaded_full = parse_corpus(serialize_corpus(full));
    o.expect(loaded_full == full, "save/load round trip with reduction");
    double lsi_gap = 0.0;
    for (const auto& q : queries) {
        const auto qv = build_query_vector(c, make_query(q, 0.85));
        const auto vsm = cosine_scores(full, qv, Model::vsm);
        const auto lsi = cosine_scores(full, qv, Model::lsi);
        for (std::size_t d = 0; d < vsm.size(); ++d) lsi_gap = std::max(lsi_gap, std::abs(vsm[d] - lsi[d]));
    }
    o.expect(lsi_gap <= 1e-8, "full-rank LSI differs from VSM by " + std::to_string(lsi_gap));
    const SvdResult svd = thin_svd(c.dense_tdm());
    double ortho = 0.0;
    for (const DenseMatrix* f : {&svd.u, &svd.v})
        for (std::size_t i = 0; i < f->cols; ++i)
            for (std::size_t j = 0; j < f->cols; ++j) {
                double dot = 0.0;
                for (std::size_t r = 0; r < f->rows; ++r) dot += (*f)(r, i) * (*f)(r, j);
                ortho = std::max(ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
            }
    o.expect(ortho <= 1e-8, "SVD orthogonality error " + std::to_string(ortho));

    const double secs = seconds_since(t0);
    o.expect(secs < 60.0, "runtime " + fixed(secs, 1) + " s");
    o.note("invariants hold, " + fixed(secs, 2) + " s");
}

void def_use_oracle(Outcome& o) {
    int checked = 0, mismatches = 0;
    auto run = [&](const SourceProject& p) {
        const test::OracleOutcome r = test::compare_with_oracle(p);
        checked += r.checked;
        mismatches += static_cast<int>(r.mismatches.size());
        for (const auto& m : r.mismatches) o.expect(false, m);
    };
    const SourceProject fixtures = test::load_fixture("straight_line");
    for (const auto& f : fixtures.files) run(make_project({f}));
    run(fixtures);
    std::mt19937 rng(424242);
    for (int round = 0; round < 100; ++round) {
        std::vector<std::string> globals;
        run(make_project({{"g.c", test::random_program(rng, round, globals)}}));
    }
    o.note(std::to_string(checked) + " (statement, variable) pairs, " + std::to_string(mismatches) + " mismatches");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"worked-example slice", worked_example},
        {"weight reproduction", weights},
        {"background-table TDM", background_tdm},
        {"query semantics", query_semantics},
        {"metric arithmetic", metrics},
        {"synthetic project recall and invariant suite", thermo_suite},
        {"def-use oracle equivalence", def_use_oracle},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.expect(false, std::string("exception: ") + e.what());
        }
        if (!o.passed()) ++failed;
        std::cout << (o.passed() ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail()
                  << '\n';
    }
    return failed;
}
