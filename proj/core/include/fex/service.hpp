#pragma once

#include <map>
#include <string>
#include <string_view>

#include "fex/corpus.hpp"
#include "fex/program_model.hpp"
#include "fex/project.hpp"
#include "fex/query.hpp"
#include "fex/slicer.hpp"

namespace fex {

struct Extraction {
    CorpusSlice corpus_slice;
    FeatureSlice feature;
    Provenance provenance;
};

/// Query the corpus, then close the seeds over the program model.
Extraction run_extraction(const Corpus& corpus, const ProgramModel& model, const Query& query, Model scoring,
                          int ipd_limit);

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Request handling behind `fex serve`, independent of any HTTP library.
/// Holds the project, corpus and program model immutably; every handler is
/// const and safe to call concurrently.
///
///   GET  /api/meta
///   GET  /api/files
///   GET  /api/file?path=<relative path>
///   POST /api/query  {"terms":[..], "threshold":0.85, "model":"vsm"}
///   POST /api/slice  {"terms":[..], "threshold":0.85, "ipd_limit":2, "model":"vsm"}
class Service {
public:
    Service(SourceProject project, Corpus corpus);

    HttpResponse handle(std::string_view method, std::string_view path,
                        const std::map<std::string, std::string>& params, std::string_view body) const;

    HttpResponse meta() const;
    HttpResponse files() const;
    HttpResponse file(const std::map<std::string, std::string>& params) const;
    HttpResponse query(std::string_view body) const;
    HttpResponse slice(std::string_view body) const;

    const SourceProject& project() const { return project_; }
    const Corpus& corpus() const { return corpus_; }
    const ProgramModel& model() const { return model_; }

private:
    SourceProject project_;
    Corpus corpus_;
    ProgramModel model_;
};

}  // namespace fex
