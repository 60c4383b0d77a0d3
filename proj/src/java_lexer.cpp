#include "faast/java_lexer.hpp"

#include <array>
#include <cctype>

#include "faast/errors.hpp"

namespace faast {

namespace {

const std::array<std::string_view, 50> kKeywords = {
    "abstract", "assert",   "boolean",  "break",      "byte",     "case",
    "catch",    "char",     "class",    "const",      "continue", "default",
    "do",       "double",   "else",     "enum",       "extends",  "final",
    "finally",  "float",    "for",      "goto",       "if",       "implements",
    "import",   "instanceof", "int",    "interface",  "long",     "native",
    "new",      "package",  "private",  "protected",  "public",   "return",
    "short",    "static",   "strictfp", "super",      "switch",   "synchronized",
    "this",     "throw",    "throws",   "transient",  "try",      "void",
    "volatile", "while",
};

// Longest-match table of multi/single character operators and separators.
const std::array<std::string_view, 48> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->",  "::",  "++",  "--",  "<<",
    ">>",   "<=",  ">=",  "==",  "!=",  "&&",  "||",  "+=",  "-=",  "*=",
    "/=",   "%=",  "&=",  "|=",  "^=",  "+",   "-",   "*",   "/",   "%",
    "=",    "<",   ">",   "!",   "~",   "&",   "|",   "^",   "?",   ":",
    ";",    ",",   ".",   "(",   ")",   "{",   "}",   "@",
};

bool is_separator_text(std::string_view s) {
    return s == "(" || s == ")" || s == "{" || s == "}" || s == "[" || s == "]" ||
           s == ";" || s == "," || s == "." || s == "..." || s == "@" || s == "::";
}

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool ident_part(char c) {
    return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

struct Cursor {
    std::string_view src;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    bool done() const { return pos >= src.size(); }
    char peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }
    void advance() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }
    void advance(size_t n) {
        for (size_t i = 0; i < n; ++i) advance();
    }
};

[[noreturn]] void fail(const Cursor& c, const std::string& msg) {
    throw ParseError(msg, c.line, c.col);
}

void lex_number(Cursor& c, std::vector<Token>& out) {
    int line = c.line, col = c.col;
    size_t start = c.pos;
    bool floating = false;

    auto digits = [&](auto pred) {
        while (!c.done() && (pred(c.peek()) || c.peek() == '_')) c.advance();
    };
    auto is_dec = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; };
    auto is_hex = [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)) != 0; };

    if (c.peek() == '0' && (c.peek(1) == 'x' || c.peek(1) == 'X')) {
        c.advance(2);
        digits(is_hex);
    } else if (c.peek() == '0' && (c.peek(1) == 'b' || c.peek(1) == 'B')) {
        c.advance(2);
        digits(is_dec);
    } else {
        digits(is_dec);
        if (c.peek() == '.' && is_dec(c.peek(1))) {
            floating = true;
            c.advance();
            digits(is_dec);
        }
        if (c.peek() == 'e' || c.peek() == 'E') {
            char after = c.peek(1);
            if (is_dec(after) || ((after == '+' || after == '-') && is_dec(c.peek(2)))) {
                floating = true;
                c.advance();
                if (c.peek() == '+' || c.peek() == '-') c.advance();
                digits(is_dec);
            }
        }
    }
    if (c.peek() == 'f' || c.peek() == 'F' || c.peek() == 'd' || c.peek() == 'D') {
        floating = true;
        c.advance();
    } else if (c.peek() == 'l' || c.peek() == 'L') {
        c.advance();
    }
    out.push_back({floating ? TokenType::FloatingLiteral : TokenType::IntegerLiteral,
                   std::string(c.src.substr(start, c.pos - start)), line, col});
}

void lex_quoted(Cursor& c, char quote, std::vector<Token>& out) {
    int line = c.line, col = c.col;
    size_t start = c.pos;
    c.advance();  // opening quote
    while (!c.done() && c.peek() != quote) {
        if (c.peek() == '\n') fail(c, "unterminated literal");
        if (c.peek() == '\\') {
            c.advance();
            if (c.done()) break;
        }
        c.advance();
    }
    if (c.done()) fail(c, "unterminated literal");
    c.advance();  // closing quote
    out.push_back({quote == '"' ? TokenType::StringLiteral : TokenType::CharLiteral,
                   std::string(c.src.substr(start, c.pos - start)), line, col});
}

}  // namespace

bool is_java_keyword(std::string_view word) {
    for (auto k : kKeywords)
        if (k == word) return true;
    return word == "true" || word == "false" || word == "null";
}

bool is_java_identifier(std::string_view word) {
    if (word.empty() || is_java_keyword(word)) return false;
    if (!ident_start(word[0])) return false;
    for (char ch : word)
        if (!ident_part(ch)) return false;
    return true;
}

std::vector<Token> lex_java(std::string_view source) {
    std::vector<Token> out;
    Cursor c{source};

    while (!c.done()) {
        char ch = c.peek();
        if (std::isspace(static_cast<unsigned char>(ch))) {
            c.advance();
            continue;
        }
        if (ch == '/' && c.peek(1) == '/') {
            while (!c.done() && c.peek() != '\n') c.advance();
            continue;
        }
        if (ch == '/' && c.peek(1) == '*') {
            c.advance(2);
            while (!c.done() && !(c.peek() == '*' && c.peek(1) == '/')) c.advance();
            if (c.done()) fail(c, "unterminated block comment");
            c.advance(2);
            continue;
        }
        if (ident_start(ch)) {
            int line = c.line, col = c.col;
            size_t start = c.pos;
            while (!c.done() && ident_part(c.peek())) c.advance();
            std::string word(source.substr(start, c.pos - start));
            TokenType type = TokenType::Identifier;
            if (word == "true" || word == "false")
                type = TokenType::BoolLiteral;
            else if (word == "null")
                type = TokenType::NullLiteral;
            else if (is_java_keyword(word))
                type = TokenType::Keyword;
            out.push_back({type, std::move(word), line, col});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(ch)) ||
            (ch == '.' && std::isdigit(static_cast<unsigned char>(c.peek(1))))) {
            lex_number(c, out);
            continue;
        }
        if (ch == '"' || ch == '\'') {
            lex_quoted(c, ch, out);
            continue;
        }
        if (ch == '[' || ch == ']') {
            out.push_back({TokenType::Separator, std::string(1, ch), c.line, c.col});
            c.advance();
            continue;
        }
        bool matched = false;
        for (auto op : kOperators) {
            if (source.substr(c.pos, op.size()) == op) {
                TokenType type =
                    is_separator_text(op) ? TokenType::Separator : TokenType::Operator;
                out.push_back({type, std::string(op), c.line, c.col});
                c.advance(op.size());
                matched = true;
                break;
            }
        }
        if (!matched) fail(c, std::string("unexpected character '") + ch + "'");
    }
    out.push_back({TokenType::EndOfInput, "", c.line, c.col});
    return out;
}

}  // namespace faast
