#pragma once

#include <stdexcept>
#include <string>

namespace probelight {

/// Base class for every error raised by the library. Callers that only care
/// about "something failed" catch this; tests match the concrete subclasses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define PROBELIGHT_DEFINE_ERROR(Name)                                      \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

// imagekit
PROBELIGHT_DEFINE_ERROR(IoError);
PROBELIGHT_DEFINE_ERROR(FormatError);
PROBELIGHT_DEFINE_ERROR(SpaceMismatch);
PROBELIGHT_DEFINE_ERROR(DimensionMismatch);
PROBELIGHT_DEFINE_ERROR(ChannelMismatch);

// radiometry
PROBELIGHT_DEFINE_ERROR(LengthMismatch);
PROBELIGHT_DEFINE_ERROR(EvOrderError);

// geometry / aggregation
PROBELIGHT_DEFINE_ERROR(DegenerateSpec);
PROBELIGHT_DEFINE_ERROR(EmptyStack);

// backend
PROBELIGHT_DEFINE_ERROR(TransportError);
PROBELIGHT_DEFINE_ERROR(ProtocolError);
PROBELIGHT_DEFINE_ERROR(BackendError);

// orchestrator
PROBELIGHT_DEFINE_ERROR(RangeError);
PROBELIGHT_DEFINE_ERROR(ConfigError);

#undef PROBELIGHT_DEFINE_ERROR

} // namespace probelight
