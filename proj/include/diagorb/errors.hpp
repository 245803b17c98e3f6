#ifndef DIAGORB_ERRORS_HPP
#define DIAGORB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace diagorb {

/// Bad numeric parameter (horizon <= 0, p < 1, malformed literal, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point with a coordinate outside the system's space.
class InvalidPoint : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// System description violating a structural invariant.
class InvalidSystem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation called in the wrong state, e.g. a function table not matching the support.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace diagorb

#endif
