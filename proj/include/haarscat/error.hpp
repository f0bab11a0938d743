#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace haarscat {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    IndexOutOfRange,
    NegativeInput,
    OddSize,
    EmptyBatch,
    ShapeMismatch,
    TooFewSamples,
    WrongMode,
    InconsistentPartition,
    InadmissibleIndex,
    TooSmall,
    AmbiguousReconstruction,
    InconsistentInputs,
    InvalidModel,
    ZeroGap,
    DegenerateDictionary,
    SingularSystem,
    BadMagic,
    TruncatedFile,
    NotPowerOfTwo,
    VersionMismatch,
    CorruptFile,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

}  // namespace haarscat
