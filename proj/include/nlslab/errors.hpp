#pragma once

#include <stdexcept>
#include <string>

namespace nlslab {

/// Precondition violated by the caller.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// NaN/Inf or overflow inside a computation.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state left (or would have to be evaluated outside) its computational box.
class DomainEscape : public std::runtime_error {
public:
    DomainEscape(const std::string& what, double offending)
        : std::runtime_error(what), offending_(offending) {}
    double offending() const noexcept { return offending_; }

private:
    double offending_;
};

/// mu has mass where nu has none.
class NotAbsolutelyContinuous : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nlslab
