#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fex {

/// Usage errors are caller mistakes (bad flags, out-of-range thresholds);
/// data errors come from the inputs (corrupt corpus, fingerprint mismatch).
enum class ErrorKind { usage, data };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& message) { return Error(ErrorKind::usage, message); }
inline Error data_error(const std::string& message) { return Error(ErrorKind::data, message); }

/// Non-fatal finding recorded while processing input. `line` is 0 when the
/// diagnostic is not tied to a position.
struct Diagnostic {
    std::string file;
    int line = 0;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

std::string to_string(const Diagnostic& d);

}  // namespace fex
