#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "fex/corpus.hpp"
#include "fex/corpus_io.hpp"
#include "fex/eval.hpp"
#include "fex/program_model.hpp"
#include "fex/query.hpp"
#include "fex/service.hpp"
#include "fex/slicer.hpp"
#include "http_server.hpp"

namespace fex::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto log = std::make_shared<spdlog::logger>("fex", sink);
    log->set_pattern("fex: %l: %v");
    log->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("FEX_LOG"); env && *env) log->set_level(spdlog::level::from_str(env));
    return log;
}

void log_diagnostics(spdlog::logger& log, const Diagnostics& ds) {
    for (const auto& d : ds) log.warn("{}", to_string(d));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw data_error("cannot write " + path);
}

struct CorpusFlags {
    std::string weighting = "lognorm";
    std::optional<int> lsi_rank;
    bool no_headers = false;
    bool no_keyword_filter = false;

    void add(CLI::App& app) {
        app.add_option("--weighting", weighting, "raw, tfidf or lognorm")->check(CLI::IsMember({"raw", "tfidf", "lognorm"}));
        app.add_option("--lsi-rank", lsi_rank, "rank of the latent-semantic reduction");
        app.add_flag("--no-headers", no_headers, "skip .h files");
        app.add_flag("--no-keyword-filter", no_keyword_filter, "keep C keywords as terms");
    }

    BuildOptions build_options() const {
        BuildOptions o;
        o.weighting = *parse_weighting(weighting);
        o.keyword_filter = !no_keyword_filter;
        o.reduction_rank = lsi_rank;
        return o;
    }
};

struct QueryFlags {
    std::string terms;
    double threshold = 0.85;
    std::string model = "vsm";

    void add(CLI::App& app, bool terms_required = true) {
        auto* t = app.add_option("-t,--terms", terms, "comma-separated query terms");
        if (terms_required) t->required();
        app.add_option("-s,--threshold", threshold, "similarity threshold in [0,1]");
        app.add_option("--model", model, "vsm or lsi")->check(CLI::IsMember({"vsm", "lsi"}));
    }

    Query query() const { return make_query(split_terms(terms), threshold); }
    Model scoring() const { return *parse_model(model); }
};

SourceProject open_project(const std::string& path, bool headers) {
    LoadOptions o;
    o.include_headers = headers;
    return load_project(path, o);
}

// Loads the corpus file when given, otherwise indexes the project in memory.
Corpus corpus_for(const SourceProject& project, const std::string& corpus_path, const CorpusFlags& flags,
                  Model scoring, spdlog::logger& log) {
    Diagnostics ds;
    Corpus corpus;
    if (!corpus_path.empty()) {
        corpus = load_corpus(corpus_path);
        if (auto d = check_fingerprint(corpus, project)) throw data_error(d->message);
    } else {
        corpus = build_corpus(project, flags.build_options(), &ds);
        if (scoring == Model::lsi && !corpus.reduction) corpus = reduce_lsi(corpus, default_lsi_rank(corpus), &ds);
    }
    log_diagnostics(log, ds);
    return corpus;
}

int cmd_index(const std::string& project_path, const std::string& out_path, const CorpusFlags& flags,
              std::ostream& out, spdlog::logger& log) {
    const auto t0 = Clock::now();
    const SourceProject project = open_project(project_path, !flags.no_headers);
    Diagnostics ds;
    const Corpus corpus = build_corpus(project, flags.build_options(), &ds);
    log_diagnostics(log, ds);
    if (corpus.documents.empty() || corpus.terms.empty())
        throw data_error("empty corpus: no documents or terms under " + project_path);
    save_corpus(corpus, out_path);
    out << "indexed " << corpus.files.size() << " files, " << corpus.documents.size() << " documents, "
        << corpus.terms.size() << " terms";
    if (corpus.reduction) out << ", lsi rank " << corpus.reduction->rank;
    out << " in " << static_cast<long>(ms_since(t0)) << " ms -> " << out_path << '\n';
    out << "fingerprint " << corpus.fingerprint << '\n';
    return ok;
}

int cmd_query(const std::string& corpus_path, const QueryFlags& q, const std::string& out_path, std::ostream& out,
              spdlog::logger& log) {
    const Query query = q.query();
    const Corpus corpus = load_corpus(corpus_path);
    const CorpusSlice slice = slice_corpus(corpus, query, q.scoring());
    log_diagnostics(log, slice.diagnostics);
    const std::string report = format_corpus_slice(slice, corpus);
    if (out_path.empty())
        out << report;
    else
        write_file(out_path, report);
    return ok;
}

struct SliceArgs {
    std::string project;
    std::string corpus;
    std::string out = "fex-slice";
    std::string seeds;
    int ipd = 2;
};

int cmd_slice(const SliceArgs& a, const QueryFlags& q, const CorpusFlags& flags, std::ostream& out,
              spdlog::logger& log) {
    const auto t0 = Clock::now();
    if (a.ipd < 0) throw usage_error("--ipd must be >= 0");
    if (a.seeds.empty() && q.terms.empty()) throw usage_error("either --terms or --seeds is required");
    const SourceProject project = open_project(a.project, !flags.no_headers);
    const ProgramModel model = build_program_model(project);
    log_diagnostics(log, model.diagnostics);

    FeatureSlice feature;
    Provenance prov;
    prov.threshold = q.threshold;
    prov.ipd_limit = a.ipd;
    if (!a.seeds.empty()) {
        Diagnostics ds;
        const auto seeds = parse_seed_file(read_file(a.seeds), &ds);
        log_diagnostics(log, ds);
        prov.terms = q.terms.empty() ? std::vector<std::string>{"<seeds>"} : split_terms(q.terms);
        feature = extract_feature(model, seeds, prov);
    } else {
        const Query query = q.query();
        const Corpus corpus = corpus_for(project, a.corpus, flags, q.scoring(), log);
        Extraction e = run_extraction(corpus, model, query, q.scoring(), a.ipd);
        feature = std::move(e.feature);
        prov = e.provenance;
    }
    log_diagnostics(log, feature.diagnostics);
    write_slice(feature, prov, a.out);
    for (const auto& [file, lines] : feature.lines) out << file << ": " << lines.size() << " lines\n";
    out << "total " << feature.line_count() << " lines in " << feature.lines.size() << " files, "
        << static_cast<long>(ms_since(t0)) << " ms -> " << a.out << '\n';
    return ok;
}

struct EvalArgs {
    std::string project;
    std::string truth;
    std::string module;
    std::string slice_dir;
    std::string json_out;
    std::string csv_out;
    bool grep = false;
    int ipd = 2;
};

int cmd_eval(const EvalArgs& a, const QueryFlags& q, const CorpusFlags& flags, std::ostream& out,
             spdlog::logger& log) {
    const SourceProject project = open_project(a.project, !flags.no_headers);
    const GroundTruthManifest manifest = load_manifest(a.truth);
    const ProgramModel model = build_program_model(project);

    std::vector<const TruthModule*> modules;
    if (!a.module.empty()) {
        const TruthModule* m = manifest.find(a.module);
        if (!m) throw usage_error("manifest has no module '" + a.module + "'");
        modules.push_back(m);
    } else {
        if (!a.slice_dir.empty()) throw usage_error("--slice needs --module");
        for (const auto& m : manifest.modules) modules.push_back(&m);
    }

    std::optional<Corpus> corpus;
    std::vector<EvalReport> reports;
    std::vector<DiffClassification> classes;
    for (const TruthModule* m : modules) {
        SliceReport sr;
        if (!a.slice_dir.empty()) {
            sr = read_slice_report(a.slice_dir);
        } else {
            if (m->terms.empty() && q.terms.empty()) throw usage_error("module " + m->name + " lists no search terms");
            if (!corpus) corpus = corpus_for(project, "", flags, q.scoring(), log);
            const Query query = make_query(q.terms.empty() ? m->terms : split_terms(q.terms), q.threshold);
            const Extraction e = run_extraction(*corpus, model, query, q.scoring(), a.ipd);
            sr = parse_slice_report(format_slice_report(e.feature, e.provenance));
        }
        reports.push_back(evaluate(sr.line_sets(), manifest, m->name, project, Tool::fex));
        classes.push_back(classify_diff(reports.back(), sr, model));
        if (a.grep) {
            const auto terms = m->terms.empty() ? split_terms(q.terms) : m->terms;
            reports.push_back(evaluate(grep_baseline(project, terms), manifest, m->name, project, Tool::grep));
            classes.push_back(classify_diff(reports.back(), SliceReport{}, model));
        }
    }
    out << format_eval_table(reports);
    if (!a.json_out.empty()) write_file(a.json_out, format_eval_json(reports, classes));
    if (!a.csv_out.empty()) write_file(a.csv_out, format_scatter_csv(reports));
    return ok;
}

int cmd_grep(const std::string& project_path, const std::string& terms, bool no_headers, std::ostream& out) {
    const SourceProject project = open_project(project_path, !no_headers);
    const LineSets hits = grep_baseline(project, split_terms(terms));
    for (const auto& [file, lines] : hits) {
        const auto text = split_lines(project.find(file)->text);
        for (int l : lines) out << file << ':' << l << ':' << text[static_cast<std::size_t>(l - 1)] << '\n';
    }
    return ok;
}

int cmd_serve(const std::string& project_path, const std::string& corpus_path, const CorpusFlags& flags,
              const std::string& host, int port, const std::string& static_dir, std::ostream& out,
              spdlog::logger& log) {
    const SourceProject project = open_project(project_path, !flags.no_headers);
    Corpus corpus = corpus_for(project, corpus_path, flags, flags.lsi_rank ? Model::lsi : Model::vsm, log);
    const Service service(project, std::move(corpus));
    httplib::Server server;
    mount_api(server, service, static_dir);
    out << "serving " << project.files.size() << " files on http://" << host << ':' << port << '\n' << std::flush;
    if (!server.listen(host, port)) throw data_error("cannot listen on " + host + ":" + std::to_string(port));
    return ok;
}

int cmd_dump(const std::string& project_path, bool no_headers, std::ostream& out) {
    out << dump_model(build_program_model(open_project(project_path, !no_headers)));
    return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    auto log = make_logger(err);
    CLI::App app{"fex: feature extraction for C code bases"};
    app.require_subcommand(1);

    CorpusFlags corpus_flags;
    QueryFlags query_flags;

    std::string project_path, corpus_path, out_path;
    auto* index = app.add_subcommand("index", "build and save the retrieval corpus");
    index->add_option("project", project_path, "project directory or file")->required();
    index->add_option("-o,--out", out_path, "corpus file")->required();
    corpus_flags.add(*index);

    auto* query = app.add_subcommand("query", "score documents and list related terms");
    query->add_option("corpus", corpus_path, "corpus file")->required();
    query->add_option("-o,--out", out_path, "write the report here instead of stdout");
    query_flags.add(*query);

    SliceArgs slice_args;
    auto* slice = app.add_subcommand("slice", "extract the feature module for a query");
    slice->add_option("project", slice_args.project, "project directory or file")->required();
    slice->add_option("-c,--corpus", slice_args.corpus, "corpus file (default: index in memory)");
    slice->add_option("-o,--out", slice_args.out, "output directory");
    slice->add_option("--ipd", slice_args.ipd, "inter-procedural distance limit");
    slice->add_option("--seeds", slice_args.seeds, "seed locations (FEXQ report or grep -n output)");
    query_flags.add(*slice, false);
    corpus_flags.add(*slice);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "compare extractions with a ground-truth manifest");
    eval->add_option("project", eval_args.project, "project directory or file")->required();
    eval->add_option("--truth", eval_args.truth, "ground-truth manifest")->required();
    eval->add_option("--module", eval_args.module, "evaluate a single module");
    eval->add_option("--slice", eval_args.slice_dir, "existing slice directory (default: extract with module terms)");
    eval->add_option("--ipd", eval_args.ipd, "inter-procedural distance limit");
    eval->add_flag("--grep", eval_args.grep, "add grep baseline rows");
    eval->add_option("--json", eval_args.json_out, "write the JSON report here");
    eval->add_option("--csv", eval_args.csv_out, "write precision/recall scatter data here");
    query_flags.add(*eval, false);
    corpus_flags.add(*eval);

    std::string grep_terms;
    bool grep_no_headers = false;
    auto* grep = app.add_subcommand("grep-baseline", "case-insensitive line match, comments removed");
    grep->add_option("project", project_path, "project directory or file")->required();
    grep->add_option("-t,--terms", grep_terms, "comma-separated terms")->required();
    grep->add_flag("--no-headers", grep_no_headers, "skip .h files");

    std::string host = "127.0.0.1", static_dir;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "HTTP API for the explorer");
    serve->add_option("project", project_path, "project directory or file")->required();
    serve->add_option("-c,--corpus", corpus_path, "corpus file (default: index in memory)");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
    serve->add_option("--static", static_dir, "directory with built explorer assets");
    corpus_flags.add(*serve);

    bool dump_no_headers = false;
    auto* dump = app.add_subcommand("dump-model", "print the parsed statement model");
    dump->add_option("project", project_path, "project directory or file")->required();
    dump->add_flag("--no-headers", dump_no_headers, "skip .h files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? ok : usage;
    }

    try {
        if (*index) return cmd_index(project_path, out_path, corpus_flags, out, *log);
        if (*query) return cmd_query(corpus_path, query_flags, out_path, out, *log);
        if (*slice) return cmd_slice(slice_args, query_flags, corpus_flags, out, *log);
        if (*eval) return cmd_eval(eval_args, query_flags, corpus_flags, out, *log);
        if (*grep) return cmd_grep(project_path, grep_terms, grep_no_headers, out);
        if (*serve)
            return cmd_serve(project_path, corpus_path, corpus_flags, host, port, static_dir, out, *log);
        if (*dump) return cmd_dump(project_path, dump_no_headers, out);
    } catch (const Error& e) {
        err << "fex: error: " << e.what() << '\n';
        return e.kind() == ErrorKind::usage ? usage : data;
    } catch (const std::exception& e) {
        err << "fex: error: " << e.what() << '\n';
        return data;
    }
    return usage;
}

}  // namespace fex::cli
