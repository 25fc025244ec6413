#pragma once

#include <stdexcept>
#include <string>

namespace snap {

// Error taxonomy shared by the library and the CLI. The CLI maps each kind
// to a fixed process exit code: config/usage -> 2, data -> 3, external -> 4.
enum class ErrorKind { config, data, external };

class SnapError : public std::runtime_error {
public:
    SnapError(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

    int exit_code() const {
        switch (kind_) {
        case ErrorKind::config: return 2;
        case ErrorKind::data: return 3;
        case ErrorKind::external: return 4;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

class ConfigError : public SnapError {
public:
    explicit ConfigError(const std::string& message)
        : SnapError(ErrorKind::config, message) {}
};

class DataError : public SnapError {
public:
    explicit DataError(const std::string& message)
        : SnapError(ErrorKind::data, message) {}
};

class ExternalServiceError : public SnapError {
public:
    explicit ExternalServiceError(const std::string& message)
        : SnapError(ErrorKind::external, message) {}
};

} // namespace snap
