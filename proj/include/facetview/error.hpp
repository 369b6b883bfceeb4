#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facetview {

/// Machine-readable error codes. Names are stable: they are what the API
/// reports in the `code` member of an error body.
enum class ErrorCode {
    CoercionError,
    MismatchedDataset,
    EmptyInput,
    DuplicateId,
    RaggedRow,
    MalformedDocument,
    NonScalarValue,
    InvalidEncoding,
    ProtocolError,
    NetworkError,
    TokenLoop,
    SourceUnavailable,
    UnparseableDate,
    ImpossibleDate,
    Unresolved,
    UnknownField,
    TypeConflict,
    UnknownFacetField,
    MalformedTree,
    UnknownDataset,
    UnknownView,
    InvalidArgument,
    UnknownFormat,
    IoError,
    UnknownRoute,
    MethodNotAllowed,
    Forbidden,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `locator` names the field, row or
/// record the error refers to, or is empty.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string locator = {})
        : std::runtime_error(message), code_(code), locator_(std::move(locator)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& locator() const noexcept { return locator_; }

private:
    ErrorCode code_;
    std::string locator_;
};

/// True for errors caused by the outside world (files, sockets, upstream
/// servers) rather than by invalid input.
bool is_environment_error(ErrorCode code) noexcept;

}  // namespace facetview
