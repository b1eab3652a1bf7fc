#include "personagraph/error.hpp"

namespace personagraph {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Version: return "version";
    case ErrorKind::Input: return "input";
    case ErrorKind::Extraction: return "extraction";
    case ErrorKind::Auth: return "auth";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::CursorInvalidated: return "cursor-invalidated";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

} // namespace personagraph
