#pragma once

#include "itslb/rule.hpp"

#include <stdexcept>
#include <string>

namespace itslb {

struct SyntaxError : std::runtime_error {
    int line, column;
    SyntaxError(int l, int c, const std::string& msg)
        : std::runtime_error("syntax error at " + std::to_string(l) + ":" + std::to_string(c) +
                             ": " + msg),
          line(l),
          column(c) {}
};

struct SemanticError : std::runtime_error {
    explicit SemanticError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parses the line-oriented ITS format:
///   # comment
///   START: f0
///   f0(x,y) -{x+1}-> f1(x,0), f2(y) :|: x > 0 && y = 1
///   f1(x,y) -> NIL
/// Performs arity padding, canonical variable renaming, start-symbol wrapping
/// and guard normalization; rejects ill-formed right-hand sides.
Program parse_program(const std::string& text);

/// Expression in the printing grammar (+ - * ^, p/q literals, parentheses).
Expr parse_expr(const std::string& text);

std::string print_program(const Program& p);

}  // namespace itslb
