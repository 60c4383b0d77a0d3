#pragma once

#include <vector>

#include "faast/ast.hpp"

namespace faast {

/// Parse one fragment into a normalized AST. The tree keeps every source
/// token as a Terminal leaf (whitespace and comments are dropped), so a
/// pre-order walk of the terminals reproduces the token stream. Node ids
/// are assigned in pre-order with the root at 0.
///
/// Throws ParseError (with position) on invalid syntax and
/// Error{Granularity} when the code is a valid fragment of the other
/// granularity than the one stated.
AstTree parse_fragment(const SourceFragment& fragment);

/// Node ids of all Terminal nodes in source order.
std::vector<int> terminals_in_order(const AstTree& tree);

}  // namespace faast
