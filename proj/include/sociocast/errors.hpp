#pragma once

#include <stdexcept>
#include <string>

namespace sociocast {

// Error taxonomy maps 1:1 onto CLI exit codes (see tools/main.cpp).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string & msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string & msg) : std::runtime_error(msg) {}
};

struct BackendError : std::runtime_error {
    std::string request_id;
    BackendError(const std::string & msg, std::string request_id_ = "")
        : std::runtime_error(request_id_.empty() ? msg : msg + " [request " + request_id_ + "]"),
          request_id(std::move(request_id_)) {}
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string & msg) : std::runtime_error(msg) {}
};

}  // namespace sociocast
