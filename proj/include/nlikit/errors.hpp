#pragma once

#include <stdexcept>
#include <string>

namespace nlikit {

// Exit codes used by the CLI; library exceptions map onto them 1:1.
enum class ExitCode : int {
    ok = 0,
    parse = 2,       // malformed configuration / table input
    validation = 3,  // well-formed input violating a domain invariant
    numeric = 4,     // quadrature budget, non-convergence, singular parameters
    io = 5,          // filesystem
    usage = 64,      // bad command line
};

struct Error : std::runtime_error {
    ExitCode code;
    Error(ExitCode c, const std::string& what) : std::runtime_error(what), code(c) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ExitCode::parse, what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ExitCode::numeric, what) {}
};

struct ConvergenceError : NumericError {
    double residual;
    ConvergenceError(const std::string& what, double res)
        : NumericError(what + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

}  // namespace nlikit
