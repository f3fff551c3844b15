#include "http_server.hpp"

#include <map>

#include <httplib.h>

namespace fex::cli {

void mount_api(httplib::Server& server, const Service& service, const std::string& static_dir) {
    auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> params;
        for (const auto& [k, v] : req.params) params.emplace(k, v);  // first value wins
        const HttpResponse r = service.handle(req.method, req.path, params, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get(R"(/api/.*)", handler);
    server.Post(R"(/api/.*)", handler);
    if (!static_dir.empty()) server.set_mount_point("/", static_dir);
}

}  // namespace fex::cli
