#pragma once

#include <map>
#include <string>

namespace tilelab {

// Arithmetic over named constants: numbers, identifiers, + - * / ^,
// unary minus, parentheses, sqrt(). Used for config values such as
// "(1+sqrt(5))/2". Throws std::runtime_error on malformed input or
// unknown identifiers.
double eval_expression(const std::string& text, const std::map<std::string, double>& constants);

}  // namespace tilelab
