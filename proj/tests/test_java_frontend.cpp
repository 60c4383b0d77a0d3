#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include "faast/errors.hpp"
#include "faast/java_lexer.hpp"
#include "faast/java_parser.hpp"

using namespace faast;

namespace {

AstTree parse_method(const std::string& code, const std::string& id = "m") {
    return parse_fragment({id, code, Granularity::Method});
}

std::vector<std::string> terminal_tokens(const AstTree& tree) {
    std::vector<std::string> out;
    for (int id : terminals_in_order(tree)) out.push_back(tree.node(id).token);
    return out;
}

/// Independent reference tokenizer: a tiny scanner written directly against
/// the Java lexical grammar, sharing no code with the production lexer.
std::vector<std::string> reference_tokenize(const std::string& code) {
    std::vector<std::string> out;
    size_t i = 0;
    auto isid = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    };
    static const std::vector<std::string> multi = {
        ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "<<", ">>", "<=", ">=",
        "==",   "!=",  "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^="};
    while (i < code.size()) {
        char c = code[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (c == '/' && i + 1 < code.size() && code[i + 1] == '/') {
            while (i < code.size() && code[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < code.size() && code[i + 1] == '*') {
            i += 2;
            while (i + 1 < code.size() && !(code[i] == '*' && code[i + 1] == '/')) ++i;
            i += 2;
            continue;
        }
        if (isid(c) && !std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = i;
            while (i < code.size() && isid(code[i])) ++i;
            out.push_back(code.substr(start, i - start));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = i;
            while (i < code.size() &&
                   (isid(code[i]) || code[i] == '.' ||
                    ((code[i] == '+' || code[i] == '-') && i > start &&
                     (code[i - 1] == 'e' || code[i - 1] == 'E'))))
                ++i;
            out.push_back(code.substr(start, i - start));
            continue;
        }
        if (c == '"' || c == '\'') {
            size_t start = i++;
            while (i < code.size() && code[i] != c) {
                if (code[i] == '\\') ++i;
                ++i;
            }
            ++i;
            out.push_back(code.substr(start, i - start));
            continue;
        }
        bool matched = false;
        for (const auto& op : multi) {
            if (code.compare(i, op.size(), op) == 0) {
                out.push_back(op);
                i += op.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            out.push_back(std::string(1, c));
            ++i;
        }
    }
    return out;
}

int count_kind(const AstTree& tree, NodeKind kind) {
    int n = 0;
    for (const AstNode& node : tree.nodes)
        if (node.kind == kind) ++n;
    return n;
}

}  // namespace

TEST_CASE("terminal sequence of a simple method matches a reference tokenizer") {
    auto tree = parse_method("int f(){return 1;}");
    std::vector<std::string> expected = {"int", "f", "(", ")", "{", "return", "1", ";", "}"};
    CHECK(terminal_tokens(tree) == expected);
    CHECK(terminal_tokens(tree) == reference_tokenize("int f(){return 1;}"));
}

TEST_CASE("empty fragment raises ParseError") {
    CHECK_THROWS_AS(parse_method(""), ParseError);
}

TEST_CASE("if/else parses to one IfStatement with three children") {
    auto tree = parse_method("int f(){ if(a>0) b=1; else b=2; }");
    CHECK(count_kind(tree, NodeKind::IfStatement) == 1);
    for (const AstNode& n : tree.nodes) {
        if (n.kind == NodeKind::IfStatement) {
            REQUIRE(n.children.size() == 3);
            CHECK(tree.node(n.children[0]).kind == NodeKind::Condition);
        }
    }
    // all tokens survive, in source order
    CHECK(terminal_tokens(tree) == reference_tokenize("int f(){ if(a>0) b=1; else b=2; }"));
}

TEST_CASE("else-if chains nest an IfStatement as the third child") {
    auto tree = parse_method("void f(){ if(a>0) b=1; else if(a<0) b=2; else b=3; }");
    bool found = false;
    for (const AstNode& n : tree.nodes) {
        if (n.kind == NodeKind::IfStatement && n.children.size() == 3) {
            if (tree.node(n.children[2]).kind == NodeKind::IfStatement) found = true;
        }
    }
    CHECK(found);
    CHECK(count_kind(tree, NodeKind::IfStatement) == 2);
}

TEST_CASE("granularity mismatch is a distinct error") {
    try {
        parse_fragment({"x", "class A { }", Granularity::Method});
        FAIL("expected GranularityError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Granularity);
    }
    try {
        parse_fragment({"x", "int f(){return 0;}", Granularity::Class});
        FAIL("expected GranularityError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Granularity);
    }
}

TEST_CASE("parse errors carry positions") {
    try {
        parse_method("int f(){ return 1 }");  // missing semicolon
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 1);
        CHECK(e.column() >= 1);
    }
}

TEST_CASE("parse is deterministic") {
    const std::string code = "int f(int a){ while(a>0){ a = a - 1; } return a; }";
    auto t1 = parse_method(code);
    auto t2 = parse_method(code);
    REQUIRE(t1.size() == t2.size());
    for (int i = 0; i < t1.size(); ++i) {
        CHECK(t1.node(i).kind == t2.node(i).kind);
        CHECK(t1.node(i).token == t2.node(i).token);
        CHECK(t1.node(i).children == t2.node(i).children);
    }
}

TEST_CASE("pre-order property: every node id is smaller than its descendants") {
    auto tree = parse_method(
        "int f(int[] xs){ int s=0; for(int i=0;i<xs.length;i++){ s+=xs[i]; } return s; }");
    std::function<void(int)> walk = [&](int id) {
        for (int c : tree.node(id).children) {
            CHECK(id < c);
            walk(c);
        }
    };
    walk(tree.root);
    // exactly one root, contiguous ids
    std::set<int> seen;
    for (const AstNode& n : tree.nodes) {
        CHECK(n.node_id == static_cast<int>(seen.size()));
        seen.insert(n.node_id);
    }
}

TEST_CASE("terminals_in_order is ascending (follows from pre-order numbering)") {
    auto tree = parse_method("void g(){ int a = 1; a = a + 2; }");
    auto terms = terminals_in_order(tree);
    CHECK(std::is_sorted(terms.begin(), terms.end()));
    CHECK_FALSE(terms.empty());
}

TEST_CASE("terminals of return 1; appear in order") {
    auto tree = parse_method("int f(){return 1;}");
    auto tokens = terminal_tokens(tree);
    auto it = std::find(tokens.begin(), tokens.end(), "return");
    REQUIRE(it != tokens.end());
    CHECK(*(it + 1) == "1");
    CHECK(*(it + 2) == ";");
}

TEST_CASE("terminal nodes have no children") {
    auto tree = parse_method("int f(){ return a.b(c, 1) + \"x\"; }");
    for (const AstNode& n : tree.nodes)
        if (n.kind == NodeKind::Terminal) CHECK(n.children.empty());
}

TEST_CASE("class granularity parses fields, constructors and methods") {
    auto tree = parse_fragment({"c",
                                "public class Acc { private int total; "
                                "Acc(int t){ total = t; } "
                                "int get(){ return total; } }",
                                Granularity::Class});
    CHECK(count_kind(tree, NodeKind::ClassDeclaration) == 1);
    CHECK(count_kind(tree, NodeKind::ConstructorDeclaration) == 1);
    CHECK(count_kind(tree, NodeKind::MethodDeclaration) == 1);
    CHECK(count_kind(tree, NodeKind::FieldDeclaration) == 1);
}

TEST_CASE("token stream is reproduced for a mixed statement zoo") {
    const std::string code =
        "void zoo(int n, java.util.List<String> xs) {\n"
        "  int[] a = new int[n];\n"
        "  do { n--; } while (n > 0);\n"
        "  switch (n) { case 0: n = 1; break; default: n = 2; }\n"
        "  try { n = xs.size(); } catch (RuntimeException e) { throw e; } finally { n = 0; }\n"
        "  String s = n > 3 ? \"hi\" : \"lo\"; // comment\n"
        "  for (String x : xs) { s = s + x; }\n"
        "  /* block comment */ label: while (true) { break label; }\n"
        "  Object o = (Object) s; boolean b = o instanceof String;\n"
        "  double d = 1.5e-3; long l = 0x1fL; n += a[0] << 2;\n"
        "}";
    auto tree = parse_method(code);
    CHECK(terminal_tokens(tree) == reference_tokenize(code));
}
