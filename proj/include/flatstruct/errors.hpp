#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flatstruct {

// Exit-code class used by the CLI: input problems, numeric breakdowns, or
// plain check failures reported in data.
enum class ErrorKind { Input, Numeric, Check };

class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what, ErrorKind kind)
        : std::runtime_error(name + ": " + what), name_(std::move(name)), kind_(kind) {}
    const std::string& name() const { return name_; }
    ErrorKind kind() const { return kind_; }

private:
    std::string name_;
    ErrorKind kind_;
};

#define FLATSTRUCT_ERROR(Name, Kind)                                          \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(#Name, what, Kind) {} \
    };

FLATSTRUCT_ERROR(DivisionNotExact, ErrorKind::Input)
FLATSTRUCT_ERROR(SchemaError, ErrorKind::Input)
FLATSTRUCT_ERROR(UnknownId, ErrorKind::Input)
FLATSTRUCT_ERROR(NotMonic, ErrorKind::Input)
FLATSTRUCT_ERROR(RowNotLogarithmic, ErrorKind::Check)
FLATSTRUCT_ERROR(NoRescalingFound, ErrorKind::Check)
FLATSTRUCT_ERROR(DegenerateJacobian, ErrorKind::Check)
FLATSTRUCT_ERROR(EntryIdenticallyZero, ErrorKind::Input)
FLATSTRUCT_ERROR(InsufficientSamples, ErrorKind::Input)
FLATSTRUCT_ERROR(DegenerateTheta, ErrorKind::Input)
FLATSTRUCT_ERROR(PoleAtY, ErrorKind::Input)
FLATSTRUCT_ERROR(ResonantLambda, ErrorKind::Input)
FLATSTRUCT_ERROR(ConditionDViolation, ErrorKind::Input)
FLATSTRUCT_ERROR(RootNotConverged, ErrorKind::Numeric)
FLATSTRUCT_ERROR(RootCollision, ErrorKind::Numeric)
FLATSTRUCT_ERROR(EigenvalueCollision, ErrorKind::Numeric)
FLATSTRUCT_ERROR(RankViolation, ErrorKind::Numeric)
FLATSTRUCT_ERROR(StepUnderflow, ErrorKind::Numeric)
FLATSTRUCT_ERROR(TrackingLost, ErrorKind::Numeric)
FLATSTRUCT_ERROR(FactorizationFailed, ErrorKind::Numeric)
FLATSTRUCT_ERROR(InverseMismatch, ErrorKind::Numeric)
FLATSTRUCT_ERROR(BlowUp, ErrorKind::Numeric)
FLATSTRUCT_ERROR(PivotColumnNotFound, ErrorKind::Numeric)
FLATSTRUCT_ERROR(DegenerateLinearEntry, ErrorKind::Numeric)

#undef FLATSTRUCT_ERROR

class ParseError : public Error {
public:
    ParseError(std::size_t position, std::string expected, std::string found)
        : Error("ParseError",
                "at offset " + std::to_string(position) + ": expected " + expected + ", found '" +
                    found + "'",
                ErrorKind::Input),
          position(position), expected(std::move(expected)), found(std::move(found)) {}
    std::size_t position;
    std::string expected;
    std::string found;
};

}  // namespace flatstruct
