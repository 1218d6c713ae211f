#ifndef CHR_PARSER_HPP
#define CHR_PARSER_HPP

#include <string>
#include <vector>

#include "chr/ast.hpp"
#include "chr/errors.hpp"

namespace chr {

/// Parse a program in .chr surface syntax. Rules keep their textual order;
/// unnamed rules get names r<index> by position. #const names are folded
/// into rule terms. Throws ParseError.
Program parse_program(const std::string& text);

/// Parse a comma-separated goal. atomic(...) wrappers are only accepted
/// when allow_atomic is set (the chrt dialect). Throws ParseError.
std::vector<Constraint> parse_goal(const std::string& text,
                                   bool allow_atomic = true);

/// Parse a single ground term, e.g. a location constant.
Term parse_term(const std::string& text);

} // namespace chr

#endif
