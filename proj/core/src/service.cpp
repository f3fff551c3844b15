#include "fex/service.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace fex {

using nlohmann::json;

Extraction run_extraction(const Corpus& corpus, const ProgramModel& model, const Query& query, Model scoring,
                          int ipd_limit) {
    if (ipd_limit < 0) throw usage_error("ipd limit must be >= 0");
    Extraction e;
    e.corpus_slice = slice_corpus(corpus, query, scoring);
    e.provenance = {query.terms, query.threshold, ipd_limit};
    e.feature = extract_feature(model, e.corpus_slice.seeds(), e.provenance);
    e.feature.diagnostics.insert(e.feature.diagnostics.begin(), e.corpus_slice.diagnostics.begin(),
                                 e.corpus_slice.diagnostics.end());
    return e;
}

namespace {

HttpResponse json_response(int status, const json& j) { return {status, "application/json", j.dump() + "\n"}; }

HttpResponse error_response(int status, const std::string& message) {
    return json_response(status, json{{"error", message}});
}

json diagnostics_json(const Diagnostics& ds) {
    json arr = json::array();
    for (const auto& d : ds) arr.push_back({{"file", d.file}, {"line", d.line}, {"message", d.message}});
    return arr;
}

struct Request {
    Query query;
    Model model = Model::vsm;
    int ipd_limit = 2;
};

// Throws usage errors for anything malformed; callers map them to 400.
Request parse_request(std::string_view body, bool want_ipd) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw usage_error(std::string("request body is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw usage_error("request body must be a JSON object");
    if (!j.contains("terms") || !j["terms"].is_array()) throw usage_error("'terms' must be an array of strings");
    std::vector<std::string> terms;
    for (const auto& t : j["terms"]) {
        if (!t.is_string()) throw usage_error("'terms' must be an array of strings");
        terms.push_back(t.get<std::string>());
    }
    double threshold = 0.85;
    if (j.contains("threshold")) {
        if (!j["threshold"].is_number()) throw usage_error("'threshold' must be a number");
        threshold = j["threshold"].get<double>();
    }
    Request r;
    r.query = make_query(terms, threshold);
    if (j.contains("model")) {
        if (!j["model"].is_string()) throw usage_error("'model' must be \"vsm\" or \"lsi\"");
        const auto m = parse_model(j["model"].get<std::string>());
        if (!m) throw usage_error("'model' must be \"vsm\" or \"lsi\"");
        r.model = *m;
    }
    if (want_ipd && j.contains("ipd_limit")) {
        if (!j["ipd_limit"].is_number_integer()) throw usage_error("'ipd_limit' must be a non-negative integer");
        r.ipd_limit = j["ipd_limit"].get<int>();
        if (r.ipd_limit < 0) throw usage_error("'ipd_limit' must be a non-negative integer");
    }
    return r;
}

}  // namespace

Service::Service(SourceProject project, Corpus corpus)
    : project_(std::move(project)), corpus_(std::move(corpus)), model_(build_program_model(project_)) {
    if (auto d = check_fingerprint(corpus_, project_)) throw data_error(d->message);
}

HttpResponse Service::handle(std::string_view method, std::string_view path,
                             const std::map<std::string, std::string>& params, std::string_view body) const {
    struct Route {
        std::string_view path;
        std::string_view method;
    };
    static const Route routes[] = {{"/api/meta", "GET"},   {"/api/files", "GET"},  {"/api/file", "GET"},
                                   {"/api/query", "POST"}, {"/api/slice", "POST"}};
    const Route* route = nullptr;
    for (const auto& r : routes)
        if (r.path == path) route = &r;
    if (!route) return error_response(404, "unknown endpoint " + std::string(path));
    if (route->method != method)
        return error_response(405, std::string(path) + " expects " + std::string(route->method));
    try {
        if (path == "/api/meta") return meta();
        if (path == "/api/files") return files();
        if (path == "/api/file") return file(params);
        if (path == "/api/query") return query(body);
        return slice(body);
    } catch (const Error& e) {
        return error_response(e.kind() == ErrorKind::usage ? 400 : 500, e.what());
    }
}

HttpResponse Service::meta() const {
    json j;
    j["files"] = corpus_.files.size();
    j["documents"] = corpus_.documents.size();
    j["terms"] = corpus_.terms.size();
    j["tdm_entries"] = corpus_.tdm.size();
    j["weighting"] = to_string(corpus_.weighting);
    j["keyword_filter"] = corpus_.keyword_filter;
    j["include_headers"] = corpus_.include_headers;
    j["fingerprint"] = corpus_.fingerprint;
    j["lsi_rank"] = corpus_.reduction ? json(corpus_.reduction->rank) : json(nullptr);
    j["models"] = corpus_.reduction ? json::array({"vsm", "lsi"}) : json::array({"vsm"});
    j["statements"] = model_.statements.size();
    j["functions"] = model_.functions.size();
    j["defaults"] = {{"threshold", 0.85}, {"ipd_limit", 2}};
    return json_response(200, j);
}

HttpResponse Service::files() const {
    json arr = json::array();
    for (const auto& f : project_.files)
        arr.push_back({{"path", f.path}, {"lines", split_lines(f.text).size()}});
    return json_response(200, json{{"files", arr}});
}

HttpResponse Service::file(const std::map<std::string, std::string>& params) const {
    const auto it = params.find("path");
    if (it == params.end() || it->second.empty()) return error_response(400, "missing 'path' parameter");
    const SourceFile* f = project_.find(it->second);
    if (!f) return error_response(404, "unknown file " + it->second);
    return json_response(200, json{{"path", f->path}, {"lines", split_lines(f->text).size()}, {"text", f->text}});
}

HttpResponse Service::query(std::string_view body) const {
    const Request r = parse_request(body, false);
    const CorpusSlice s = slice_corpus(corpus_, r.query, r.model);
    json docs = json::array();
    for (const auto& d : s.scores) {
        const Document& doc = corpus_.documents[static_cast<std::size_t>(d.doc)];
        const bool retained = std::any_of(s.retained.begin(), s.retained.end(),
                                          [&](const DocumentScore& x) { return x.doc == d.doc; });
        docs.push_back({{"id", d.doc},
                        {"name", doc.name},
                        {"file", doc.file},
                        {"score", d.score},
                        {"cosine", d.cosine},
                        {"retained", retained}});
    }
    json related = json::object();
    for (const auto& [term, locs] : s.related_terms) {
        json arr = json::array();
        for (const auto& l : locs)
            arr.push_back({{"file", l.file}, {"line", l.line}, {"column", l.column}, {"context", lex::to_string(l.context)}});
        related[term] = arr;
    }
    return json_response(200, json{{"terms", r.query.terms},
                                   {"threshold", r.query.threshold},
                                   {"model", to_string(r.model)},
                                   {"documents", docs},
                                   {"related_terms", related},
                                   {"diagnostics", diagnostics_json(s.diagnostics)}});
}

HttpResponse Service::slice(std::string_view body) const {
    const Request r = parse_request(body, true);
    const Extraction e = run_extraction(corpus_, model_, r.query, r.model, r.ipd_limit);
    json files = json::array();
    for (const auto& [path, origins] : e.feature.line_origins) {
        json lines = json::array();
        json reasons = json::array();
        for (const auto& [line, o] : origins) {
            lines.push_back(line);
            reasons.push_back({{"line", line}, {"origin", to_string(o.origin)}, {"depth", o.depth}});
        }
        files.push_back({{"path", path}, {"lines", lines}, {"origins", reasons}});
    }
    return json_response(200, json{{"terms", r.query.terms},
                                   {"threshold", r.query.threshold},
                                   {"ipd_limit", r.ipd_limit},
                                   {"model", to_string(r.model)},
                                   {"line_count", e.feature.line_count()},
                                   {"files", files},
                                   {"externals", e.feature.state.externals},
                                   {"diagnostics", diagnostics_json(e.feature.diagnostics)}});
}

}  // namespace fex
