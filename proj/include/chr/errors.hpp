#ifndef CHR_ERRORS_HPP
#define CHR_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace chr {

struct ParseError : std::runtime_error {
    int line;
    int column;
    std::vector<std::string> expected;

    ParseError(int line, int column, std::string message,
               std::vector<std::string> expected = {})
        : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + message),
          line(line), column(column), expected(std::move(expected)) {}
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownIdError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonTerminationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StuckBuiltinError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RetryExhaustedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotBoundedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotOneNeighborError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownLocationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace chr

#endif
