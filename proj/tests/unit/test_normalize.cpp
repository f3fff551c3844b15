#include <doctest.h>

#include <algorithm>

#include "fex/normalize.hpp"

using fex::normalize;
using V = std::vector<std::string>;

TEST_CASE("snake and camel fragments") {
    CHECK(normalize("parse_axisCommand") == V{"axis", "axiscommand", "command", "parse", "parse_axiscommand"});
}

TEST_CASE("plain token is its own single term") { CHECK(normalize("move") == V{"move"}); }

TEST_CASE("short fragments survive as part of the whole token") {
    // "do" is later dropped by the keyword filter, not here.
    CHECK(normalize("do_command") == V{"command", "do", "do_command"});
    CHECK(normalize("move_x") == V{"move", "move_x"});
}

TEST_CASE("all-caps segments are snake case only") {
    CHECK(normalize("UNSUPPORTED_COMMAND") == V{"command", "unsupported", "unsupported_command"});
    CHECK(normalize("FAIL") == V{"fail"});
}

TEST_CASE("digit-only fragments are dropped") { CHECK(normalize("buf_16") == V{"buf", "buf_16"}); }

TEST_CASE("camel humps keep acronyms together") {
    const auto h = fex::camel_humps("HTTPServer2x");
    REQUIRE(h.size() == 2);
    CHECK(h[0] == "HTTP");
    CHECK(h[1] == "Server2x");
}

TEST_CASE("every fragment is a substring of the lowercased token") {
    for (const char* tok : {"readSensorValue", "x_AXIS_pos", "__init", "a2b_c3D", "mixedCASEToken_end"}) {
        const std::string low = fex::to_lower(tok);
        const auto terms = normalize(tok);
        for (const auto& t : terms) CHECK(low.find(t) != std::string::npos);
        CHECK(std::find(terms.begin(), terms.end(), low) != terms.end());
    }
}
