#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace faast {

enum class TokenType {
    Identifier,
    Keyword,
    IntegerLiteral,
    FloatingLiteral,
    CharLiteral,
    StringLiteral,
    BoolLiteral,
    NullLiteral,
    Operator,
    Separator,  // ( ) { } [ ] ; , . ... @ ::
    EndOfInput,
};

struct Token {
    TokenType type = TokenType::EndOfInput;
    std::string text;
    int line = 1;    // 1-based
    int column = 1;  // 1-based

    bool is(std::string_view s) const { return text == s; }
    bool is_literal() const {
        return type == TokenType::IntegerLiteral || type == TokenType::FloatingLiteral ||
               type == TokenType::CharLiteral || type == TokenType::StringLiteral ||
               type == TokenType::BoolLiteral || type == TokenType::NullLiteral;
    }
};

bool is_java_keyword(std::string_view word);
bool is_java_identifier(std::string_view word);

/// Tokenize Java source. Whitespace and comments are discarded; the result
/// always ends with a single EndOfInput token. Throws ParseError on
/// unterminated literals/comments or stray characters.
std::vector<Token> lex_java(std::string_view source);

}  // namespace faast
