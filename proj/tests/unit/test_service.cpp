#include <doctest.h>

#include <algorithm>
#include <future>
#include <set>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fex/corpus.hpp"
#include "fex/service.hpp"
#include "http_server.hpp"
#include "test_support.hpp"

using namespace fex;
using nlohmann::json;

namespace {

Service fixture_service(std::string_view name = "parse_command") {
    SourceProject p = test::load_fixture(name);
    Corpus c = build_corpus(p);
    return Service(std::move(p), std::move(c));
}

json body_of(const HttpResponse& r) { return json::parse(r.body); }

HttpResponse post(const Service& s, std::string_view path, const json& body) {
    return s.handle("POST", path, {}, body.dump());
}

}  // namespace

TEST_CASE("meta and files") {
    const Service s = fixture_service();
    const HttpResponse r = s.handle("GET", "/api/meta", {}, "");
    CHECK(r.status == 200);
    CHECK(r.content_type == "application/json");
    const json m = body_of(r);
    CHECK(m["files"] == 1);
    CHECK(m["documents"] == 1);
    CHECK(m["weighting"] == "lognorm");
    CHECK(m["defaults"]["threshold"] == 0.85);
    CHECK(m["defaults"]["ipd_limit"] == 2);
    const json f = body_of(s.handle("GET", "/api/files", {}, ""));
    CHECK(f["files"][0]["path"] == "parse_command.c");
    CHECK(f["files"][0]["lines"] == 18);
}

TEST_CASE("file endpoint") {
    const Service s = fixture_service();
    const HttpResponse ok = s.handle("GET", "/api/file", {{"path", "parse_command.c"}}, "");
    CHECK(ok.status == 200);
    CHECK(body_of(ok)["text"] == s.project().files[0].text);
    CHECK(s.handle("GET", "/api/file", {}, "").status == 400);
    CHECK(s.handle("GET", "/api/file", {{"path", "../etc/passwd"}}, "").status == 404);
}

TEST_CASE("routing errors") {
    const Service s = fixture_service();
    CHECK(s.handle("GET", "/api/nothing", {}, "").status == 404);
    CHECK(s.handle("POST", "/api/meta", {}, "").status == 405);
    CHECK(s.handle("GET", "/api/query", {}, "").status == 405);
    CHECK(s.handle("POST", "/api/query", {}, "not json").status == 400);
    CHECK(post(s, "/api/query", json{{"terms", "axis"}}).status == 400);
    CHECK(post(s, "/api/query", json{{"terms", json::array()}}).status == 400);
    CHECK(post(s, "/api/query", json{{"terms", {"axis"}}, {"threshold", 2}}).status == 400);
    CHECK(post(s, "/api/query", json{{"terms", {"axis"}}, {"model", "bm25"}}).status == 400);
    CHECK(post(s, "/api/slice", json{{"terms", {"axis"}}, {"ipd_limit", -1}}).status == 400);
    const json err = body_of(post(s, "/api/query", json{{"terms", {"axis"}}, {"threshold", 2}}));
    CHECK(err.contains("error"));
}

TEST_CASE("query endpoint") {
    const Service s = fixture_service();
    const HttpResponse r = post(s, "/api/query", json{{"terms", {"axis"}}, {"threshold", 0.85}});
    REQUIRE(r.status == 200);
    const json j = body_of(r);
    REQUIRE(j["documents"].size() == 1);
    CHECK(j["documents"][0]["score"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(j["documents"][0]["retained"] == true);
    std::set<std::string> related;
    for (const auto& [k, v] : j["related_terms"].items()) related.insert(k);
    CHECK(related == std::set<std::string>{"axis", "axis_command", "parse_axis_command"});
}

TEST_CASE("slice endpoint returns the worked example") {
    const Service s = fixture_service();
    const HttpResponse r = post(s, "/api/slice", json{{"terms", {"axis"}}, {"threshold", 0.85}, {"ipd_limit", 2}});
    REQUIRE(r.status == 200);
    const json j = body_of(r);
    CHECK(j["line_count"] == 13);
    CHECK(j["files"][0]["lines"].get<std::vector<int>>() == std::vector<int>{1, 2, 3, 6, 7, 8, 9, 10, 11, 14, 15, 16, 18});
    CHECK(j["files"][0]["origins"][0]["origin"] == "data-dep");
}

TEST_CASE("slice endpoint is monotone in the threshold") {
    const Service s = fixture_service("thermo");
    std::set<std::pair<std::string, int>> prev;
    bool first = true;
    for (double t : {0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.95}) {
        const json j = body_of(post(s, "/api/slice", json{{"terms", {"temperature"}}, {"threshold", t}}));
        std::set<std::pair<std::string, int>> cur;
        for (const auto& f : j["files"])
            for (int l : f["lines"]) cur.insert({f["path"], l});
        if (!first) CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
        prev = cur;
        first = false;
    }
}

TEST_CASE("concurrent requests are identical and leave state unchanged") {
    const Service s = fixture_service("thermo");
    const std::string meta_before = s.handle("GET", "/api/meta", {}, "").body;
    const std::string body = json{{"terms", {"sensor"}}, {"threshold", 0.85}}.dump();
    std::vector<std::future<std::string>> futures;
    for (int i = 0; i < 8; ++i)
        futures.push_back(std::async(std::launch::async, [&] { return s.handle("POST", "/api/slice", {}, body).body; }));
    const std::string first = futures[0].get();
    for (std::size_t i = 1; i < futures.size(); ++i) CHECK(futures[i].get() == first);
    CHECK(s.handle("GET", "/api/meta", {}, "").body == meta_before);
}

TEST_CASE("fingerprint mismatch is a data error") {
    SourceProject p = test::load_fixture("parse_command");
    Corpus c = build_corpus(p);
    p.files[0].text += "\nint extra;\n";
    try {
        Service s(std::move(p), std::move(c));
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
    }
}

TEST_CASE("HTTP round trip") {
    const Service s = fixture_service();
    httplib::Server server;
    cli::mount_api(server, s);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    const auto meta = client.Get("/api/meta");
    REQUIRE(meta);
    CHECK(meta->status == 200);
    CHECK(json::parse(meta->body)["documents"] == 1);
    const auto file = client.Get("/api/file?path=parse_command.c");
    REQUIRE(file);
    CHECK(file->status == 200);
    const auto sl = client.Post("/api/slice", json{{"terms", {"axis"}}}.dump(), "application/json");
    REQUIRE(sl);
    CHECK(sl->status == 200);
    CHECK(json::parse(sl->body)["line_count"] == 13);
    const auto bad = client.Post("/api/query", R"({"terms":["axis"],"threshold":2})", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    const auto missing = client.Get("/api/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    server.stop();
    t.join();
}
