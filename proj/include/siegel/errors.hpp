#pragma once

#include <stdexcept>
#include <string>

namespace siegel {

// Input outside the domain of an operation. Maps to CLI exit status 2.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A self-consistency chain that does not close (e.g. an inadmissible c).
class inadmissible_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Checkpoint or output file problems. Maps to CLI exit status 4.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class checkpoint_mismatch : public io_error {
public:
    using io_error::io_error;
};

// An internal invariant failed; always a bug.
class internal_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& what)
{
    if (!condition)
        throw precondition_error(what);
}

} // namespace siegel
