#pragma once

#include <stdexcept>
#include <string>

namespace phishguard {

// Error taxonomy shared by the library, CLI and server. The CLI maps these
// onto exit codes (input/parse -> 2, data/schema -> 3, model/state -> 4,
// network -> 5).

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FetchError : std::runtime_error {
    FetchError(std::string category, const std::string& what)
        : std::runtime_error(what), category(std::move(category)) {}
    std::string category;  // "connect", "timeout", "status", "protocol"
};

}  // namespace phishguard
