#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace personagraph {

enum class ErrorKind {
    Schema,            // unknown label / relationship, signature violation
    Validation,        // malformed argument (empty key, bad scalar)
    Integrity,         // dangling reference, missing endpoint, unknown login
    Parse,             // malformed input bytes (stream, file, page)
    Version,           // unsupported file or snapshot version
    Input,             // unusable input location (not a repository, missing file)
    Extraction,        // repository readable but an object could not be read
    Auth,              // credential rejected by the forge
    NotFound,          // forge or store object absent
    Transport,         // request could not be completed
    CursorInvalidated, // upstream rejected a saved pagination cursor
    Domain,            // argument outside the function's domain
    Config,            // inconsistent run configuration
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind is the
/// stable, machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace personagraph
