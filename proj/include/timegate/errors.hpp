#pragma once

#include <stdexcept>
#include <string>

namespace timegate {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define TIMEGATE_DEFINE_ERROR(Name)          \
    struct Name : Error {                    \
        using Error::Error;                  \
    }

// signal
TIMEGATE_DEFINE_ERROR(GridTooCoarse);
// clicks
TIMEGATE_DEFINE_ERROR(EmptyInput);
TIMEGATE_DEFINE_ERROR(DegenerateModel);
// homodyne
TIMEGATE_DEFINE_ERROR(ZeroMode);
// tomography
TIMEGATE_DEFINE_ERROR(InsufficientData);
TIMEGATE_DEFINE_ERROR(NoSignal);
TIMEGATE_DEFINE_ERROR(UnsupportedOrder);
TIMEGATE_DEFINE_ERROR(Degenerate);
// config / io
TIMEGATE_DEFINE_ERROR(ParseError);
TIMEGATE_DEFINE_ERROR(ValidationError);
TIMEGATE_DEFINE_ERROR(FormatError);
TIMEGATE_DEFINE_ERROR(TruncatedFile);
// generic precondition violations
TIMEGATE_DEFINE_ERROR(InvalidArgument);

#undef TIMEGATE_DEFINE_ERROR

}  // namespace timegate
