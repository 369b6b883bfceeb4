#include "facetview/error.hpp"

namespace facetview {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::CoercionError: return "CoercionError";
    case ErrorCode::MismatchedDataset: return "MismatchedDataset";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::NonScalarValue: return "NonScalarValue";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::TokenLoop: return "TokenLoop";
    case ErrorCode::SourceUnavailable: return "SourceUnavailable";
    case ErrorCode::UnparseableDate: return "UnparseableDate";
    case ErrorCode::ImpossibleDate: return "ImpossibleDate";
    case ErrorCode::Unresolved: return "Unresolved";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::TypeConflict: return "TypeConflict";
    case ErrorCode::UnknownFacetField: return "UnknownFacetField";
    case ErrorCode::MalformedTree: return "MalformedTree";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::UnknownView: return "UnknownView";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownRoute: return "UnknownRoute";
    case ErrorCode::MethodNotAllowed: return "MethodNotAllowed";
    case ErrorCode::Forbidden: return "Forbidden";
    }
    return "Unknown";
}

bool is_environment_error(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::ProtocolError:
    case ErrorCode::NetworkError:
    case ErrorCode::TokenLoop:
    case ErrorCode::SourceUnavailable:
    case ErrorCode::IoError:
        return true;
    default:
        return false;
    }
}

}  // namespace facetview
