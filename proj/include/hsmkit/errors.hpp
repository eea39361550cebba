#ifndef HSMKIT_ERRORS_HPP
#define HSMKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hsmkit {

/* Error taxonomy mirrors the CLI exit codes: validation -> 1,
   optimization -> 2, io -> 3.  Anything else escaping main is a bug. */

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class OptimizationError : public std::runtime_error {
public:
    explicit OptimizationError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}

#endif
