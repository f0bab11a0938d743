#include "haarscat/error.hpp"

namespace haarscat {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::NegativeInput: return "NegativeInput";
        case ErrorKind::OddSize: return "OddSize";
        case ErrorKind::EmptyBatch: return "EmptyBatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::WrongMode: return "WrongMode";
        case ErrorKind::InconsistentPartition: return "InconsistentPartition";
        case ErrorKind::InadmissibleIndex: return "InadmissibleIndex";
        case ErrorKind::TooSmall: return "TooSmall";
        case ErrorKind::AmbiguousReconstruction: return "AmbiguousReconstruction";
        case ErrorKind::InconsistentInputs: return "InconsistentInputs";
        case ErrorKind::InvalidModel: return "InvalidModel";
        case ErrorKind::ZeroGap: return "ZeroGap";
        case ErrorKind::DegenerateDictionary: return "DegenerateDictionary";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::TruncatedFile: return "TruncatedFile";
        case ErrorKind::NotPowerOfTwo: return "NotPowerOfTwo";
        case ErrorKind::VersionMismatch: return "VersionMismatch";
        case ErrorKind::CorruptFile: return "CorruptFile";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace haarscat
