#pragma once

#include <stdexcept>
#include <string>

namespace octens {

enum class ErrorKind {
    Parameter,  // caller supplied an out-of-range argument
    Format,     // file content violates its grammar or a type invariant
    Io,         // file missing, unreadable or unwritable
    Mismatch,   // a golden or expected output did not match
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorKind::Parameter, what);
}

}  // namespace octens
