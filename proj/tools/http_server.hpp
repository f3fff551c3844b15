#pragma once

#include <string>

#include "fex/service.hpp"

namespace httplib {
class Server;
}

namespace fex::cli {

/// Routes GET/POST /api/* to `service`, and serves `static_dir` (the
/// explorer's built assets) at / when it is non-empty.
void mount_api(httplib::Server& server, const Service& service, const std::string& static_dir = {});

}  // namespace fex::cli
