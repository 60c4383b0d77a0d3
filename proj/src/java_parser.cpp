#include "faast/java_parser.hpp"

#include <functional>
#include <utility>

#include "faast/errors.hpp"
#include "faast/java_lexer.hpp"

namespace faast {

namespace {

bool is_modifier(const Token& t) {
    return t.type == TokenType::Keyword &&
           (t.is("public") || t.is("private") || t.is("protected") || t.is("static") ||
            t.is("final") || t.is("abstract") || t.is("native") || t.is("synchronized") ||
            t.is("transient") || t.is("volatile") || t.is("strictfp"));
}

bool is_basic_type(const Token& t) {
    return t.type == TokenType::Keyword &&
           (t.is("int") || t.is("long") || t.is("short") || t.is("byte") || t.is("char") ||
            t.is("boolean") || t.is("float") || t.is("double") || t.is("void"));
}

bool is_assign_op(const Token& t) {
    return t.type == TokenType::Operator &&
           (t.is("=") || t.is("+=") || t.is("-=") || t.is("*=") || t.is("/=") ||
            t.is("%=") || t.is("&=") || t.is("|=") || t.is("^=") || t.is("<<=") ||
            t.is(">>=") || t.is(">>>="));
}

// Recursive-descent parser over the token vector. Builds nodes into an
// arena so that speculative parses can be rolled back by truncation; the
// final tree is renumbered in pre-order.
class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    int parse_method_fragment() {
        int id = parse_method_or_ctor(/*allow_ctor=*/false, "");
        expect_eof();
        return id;
    }

    int parse_class_fragment() {
        int id = parse_class_declaration();
        expect_eof();
        return id;
    }

    AstTree finalize(int root, std::string fragment_id) const {
        AstTree tree;
        tree.fragment_id = std::move(fragment_id);
        tree.root = 0;
        std::function<int(int)> emit = [&](int arena_id) {
            int id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            AstNode& out = tree.nodes.back();
            out.node_id = id;
            out.kind = arena_[arena_id].kind;
            out.token = arena_[arena_id].token;
            std::vector<int> kids;
            kids.reserve(arena_[arena_id].children.size());
            for (int c : arena_[arena_id].children) kids.push_back(emit(c));
            tree.nodes[id].children = std::move(kids);
            return id;
        };
        emit(root);
        return tree;
    }

private:
    struct PNode {
        NodeKind kind;
        std::string token;
        std::vector<int> children;
    };

    std::vector<Token> tokens_;
    size_t pos_ = 0;
    std::vector<PNode> arena_;

    // --- token access -----------------------------------------------------

    const Token& cur() const { return tokens_[pos_]; }
    const Token& la(size_t k) const {
        size_t i = pos_ + k;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    bool at_eof() const { return cur().type == TokenType::EndOfInput; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + (at_eof() ? " (unexpected end of input)"
                                         : " (found '" + cur().text + "')"),
                         cur().line, cur().column);
    }

    void expect_eof() const {
        if (!at_eof()) fail("trailing tokens after fragment");
    }

    // --- arena ------------------------------------------------------------

    int make(NodeKind kind) {
        arena_.push_back({kind, "", {}});
        return static_cast<int>(arena_.size() - 1);
    }

    void attach(int parent, int child) { arena_[parent].children.push_back(child); }

    void attach_front(int parent, int child) {
        auto& kids = arena_[parent].children;
        kids.insert(kids.begin(), child);
    }

    int term() {
        if (at_eof()) fail("unexpected end of input");
        arena_.push_back({NodeKind::Terminal, cur().text, {}});
        ++pos_;
        return static_cast<int>(arena_.size() - 1);
    }

    int eat(std::string_view text) {
        if (!cur().is(text)) fail("expected '" + std::string(text) + "'");
        return term();
    }

    int eat_identifier() {
        if (cur().type != TokenType::Identifier) fail("expected identifier");
        return term();
    }

    /// Run a speculative parse; on ParseError restore token position and
    /// arena and return -1.
    template <typename F>
    int speculate(F&& f) {
        size_t save_pos = pos_;
        size_t save_arena = arena_.size();
        try {
            return f();
        } catch (const ParseError&) {
            pos_ = save_pos;
            arena_.resize(save_arena);
            return -1;
        }
    }

    // --- types ------------------------------------------------------------

    bool at_type_start() const {
        return is_basic_type(cur()) || cur().type == TokenType::Identifier;
    }

    int parse_type() {
        if (is_basic_type(cur())) {
            int node = make(NodeKind::BasicType);
            attach(node, term());
            parse_dims(node);
            return node;
        }
        if (cur().type != TokenType::Identifier) fail("expected type");
        int node = make(NodeKind::ReferenceType);
        attach(node, eat_identifier());
        while (cur().is(".") && la(1).type == TokenType::Identifier) {
            attach(node, term());  // .
            attach(node, eat_identifier());
        }
        if (cur().is("<")) parse_type_arguments(node);
        parse_dims(node);
        return node;
    }

    void parse_dims(int node) {
        while (cur().is("[") && la(1).is("]")) {
            attach(node, term());
            attach(node, term());
        }
    }

    void parse_type_arguments(int node) {
        attach(node, eat("<"));
        if (cur().is(">")) {  // diamond
            attach(node, term());
            return;
        }
        while (true) {
            if (cur().is("?")) {
                attach(node, term());
                if (cur().is("extends") || cur().is("super")) {
                    attach(node, term());
                    attach(node, parse_type());
                }
            } else {
                attach(node, parse_type());
            }
            if (cur().is(",")) {
                attach(node, term());
                continue;
            }
            break;
        }
        attach(node, eat(">"));
    }

    // --- declarations -----------------------------------------------------

    int parse_annotation() {
        int node = make(NodeKind::Annotation);
        attach(node, eat("@"));
        attach(node, eat_identifier());
        while (cur().is(".")) {
            attach(node, term());
            attach(node, eat_identifier());
        }
        if (cur().is("(")) {
            int depth = 0;
            do {
                if (cur().is("(")) ++depth;
                if (cur().is(")")) --depth;
                if (at_eof()) fail("unterminated annotation");
                attach(node, term());
            } while (depth > 0);
        }
        return node;
    }

    void parse_modifiers_into(std::vector<int>& out) {
        while (true) {
            if (cur().is("@")) {
                out.push_back(parse_annotation());
            } else if (is_modifier(cur())) {
                out.push_back(term());
            } else {
                break;
            }
        }
    }

    int parse_type_parameters() {
        int node = make(NodeKind::TypeParameters);
        attach(node, eat("<"));
        int depth = 1;
        while (depth > 0) {
            if (at_eof()) fail("unterminated type parameters");
            if (cur().is("<")) ++depth;
            if (cur().is(">")) --depth;
            attach(node, term());
        }
        return node;
    }

    int parse_formal_parameter() {
        int node = make(NodeKind::FormalParameter);
        if (cur().is("final")) attach(node, term());
        attach(node, parse_type());
        if (cur().is("...")) attach(node, term());
        attach(node, eat_identifier());
        parse_dims(node);
        return node;
    }

    void parse_parameter_list(int parent) {
        attach(parent, eat("("));
        if (!cur().is(")")) {
            attach(parent, parse_formal_parameter());
            while (cur().is(",")) {
                attach(parent, term());
                attach(parent, parse_formal_parameter());
            }
        }
        attach(parent, eat(")"));
    }

    void parse_throws_clause(int parent) {
        if (!cur().is("throws")) return;
        attach(parent, term());
        attach(parent, parse_type());
        while (cur().is(",")) {
            attach(parent, term());
            attach(parent, parse_type());
        }
    }

    int parse_method_or_ctor(bool allow_ctor, const std::string& class_name) {
        std::vector<int> lead;
        parse_modifiers_into(lead);
        if (cur().is("<")) lead.push_back(parse_type_parameters());

        bool ctor = allow_ctor && cur().type == TokenType::Identifier &&
                    cur().text == class_name && la(1).is("(");
        int node = make(ctor ? NodeKind::ConstructorDeclaration : NodeKind::MethodDeclaration);
        for (int c : lead) attach(node, c);
        if (!ctor) {
            attach(node, parse_type());  // return type (void is a BasicType)
            attach(node, eat_identifier());
        } else {
            attach(node, eat_identifier());
        }
        parse_parameter_list(node);
        parse_dims(node);
        parse_throws_clause(node);
        if (cur().is(";")) {
            attach(node, term());  // abstract/native body
        } else {
            attach(node, parse_block());
        }
        return node;
    }

    int parse_class_declaration() {
        int node = make(NodeKind::ClassDeclaration);
        std::vector<int> lead;
        parse_modifiers_into(lead);
        for (int c : lead) attach(node, c);
        attach(node, eat("class"));
        std::string name = cur().text;
        attach(node, eat_identifier());
        if (cur().is("<")) attach(node, parse_type_parameters());
        if (cur().is("extends")) {
            attach(node, term());
            attach(node, parse_type());
        }
        if (cur().is("implements")) {
            attach(node, term());
            attach(node, parse_type());
            while (cur().is(",")) {
                attach(node, term());
                attach(node, parse_type());
            }
        }
        attach(node, eat("{"));
        while (!cur().is("}")) {
            if (at_eof()) fail("unterminated class body");
            attach(node, parse_class_member(name));
        }
        attach(node, eat("}"));
        return node;
    }

    int parse_class_member(const std::string& class_name) {
        if (cur().is(";")) {
            int node = make(NodeKind::StatementOther);
            attach(node, term());
            return node;
        }
        if (cur().is("{")) return parse_block();  // instance initializer
        if (cur().is("static") && la(1).is("{")) {
            int node = make(NodeKind::StatementOther);
            attach(node, term());
            attach(node, parse_block());
            return node;
        }
        // Nested class, possibly behind modifiers.
        size_t probe = pos_;
        while (probe < tokens_.size() &&
               (is_modifier(tokens_[probe]) || tokens_[probe].is("@"))) {
            if (tokens_[probe].is("@")) {
                ++probe;  // skip annotation name; arguments start a '(' we treat below
                if (probe < tokens_.size() && tokens_[probe].type == TokenType::Identifier)
                    ++probe;
                continue;
            }
            ++probe;
        }
        if (probe < tokens_.size() && tokens_[probe].is("class"))
            return parse_class_declaration();

        int member = speculate([&] { return parse_method_or_ctor(true, class_name); });
        if (member >= 0) return member;
        return parse_field_declaration();
    }

    int parse_field_declaration() {
        int node = make(NodeKind::FieldDeclaration);
        std::vector<int> lead;
        parse_modifiers_into(lead);
        for (int c : lead) attach(node, c);
        attach(node, parse_type());
        attach(node, parse_variable_declarator());
        while (cur().is(",")) {
            attach(node, term());
            attach(node, parse_variable_declarator());
        }
        attach(node, eat(";"));
        return node;
    }

    int parse_variable_declarator() {
        int node = make(NodeKind::VariableDeclarator);
        attach(node, eat_identifier());
        parse_dims(node);
        if (cur().is("=")) {
            attach(node, term());
            attach(node, parse_variable_initializer());
        }
        return node;
    }

    int parse_variable_initializer() {
        if (cur().is("{")) return parse_array_initializer();
        return parse_expression();
    }

    int parse_array_initializer() {
        int node = make(NodeKind::ArrayInitializer);
        attach(node, eat("{"));
        if (!cur().is("}")) {
            attach(node, parse_variable_initializer());
            while (cur().is(",")) {
                attach(node, term());
                if (cur().is("}")) break;  // trailing comma
                attach(node, parse_variable_initializer());
            }
        }
        attach(node, eat("}"));
        return node;
    }

    // --- statements ---------------------------------------------------------

    int parse_block() {
        int node = make(NodeKind::BlockStatement);
        attach(node, eat("{"));
        while (!cur().is("}")) {
            if (at_eof()) fail("unterminated block");
            attach(node, parse_statement());
        }
        attach(node, eat("}"));
        return node;
    }

    int parse_statement() {
        const Token& t = cur();
        if (t.is("{")) return parse_block();
        if (t.is("if")) return parse_if_statement(-1);
        if (t.is("while")) return parse_while_statement();
        if (t.is("do")) return parse_do_statement();
        if (t.is("for")) return parse_for_statement();
        if (t.is("switch")) return parse_switch_statement();
        if (t.is("return")) return parse_return_statement();
        if (t.is("throw")) return parse_throw_statement();
        if (t.is("break") || t.is("continue")) return parse_break_continue();
        if (t.is("try")) return parse_try_statement();
        if (t.is(";")) {
            int node = make(NodeKind::StatementOther);
            attach(node, term());
            return node;
        }
        if (t.is("synchronized")) {
            int node = make(NodeKind::StatementOther);
            attach(node, term());
            attach(node, eat("("));
            attach(node, parse_expression());
            attach(node, eat(")"));
            attach(node, parse_block());
            return node;
        }
        if (t.is("assert")) {
            int node = make(NodeKind::StatementOther);
            attach(node, term());
            attach(node, parse_expression());
            if (cur().is(":")) {
                attach(node, term());
                attach(node, parse_expression());
            }
            attach(node, eat(";"));
            return node;
        }
        if (t.type == TokenType::Identifier && la(1).is(":")) {  // labeled statement
            int node = make(NodeKind::StatementOther);
            attach(node, term());
            attach(node, term());
            attach(node, parse_statement());
            return node;
        }
        if (t.is("final") || at_type_start()) {
            int decl = speculate([&] { return parse_local_var_decl(/*eat_semi=*/true); });
            if (decl >= 0) return decl;
        }
        int node = make(NodeKind::ExpressionStatement);
        attach(node, parse_expression());
        attach(node, eat(";"));
        return node;
    }

    /// Local variable declaration. The speculative caller relies on this
    /// failing (throwing) for plain expressions: after the type there must
    /// be an identifier followed by '=', ';', ',' or array dims.
    int parse_local_var_decl(bool eat_semi) {
        int node = make(NodeKind::LocalVariableDeclaration);
        while (cur().is("final")) attach(node, term());
        attach(node, parse_type());
        if (cur().type != TokenType::Identifier) fail("expected variable name");
        const Token& after = la(1);
        if (!(after.is("=") || after.is(";") || after.is(",") ||
              (after.is("[") && la(2).is("]")) || (!eat_semi && (after.is(":") || after.is(")")))))
            fail("not a declaration");
        attach(node, parse_variable_declarator());
        while (cur().is(",")) {
            attach(node, term());
            attach(node, parse_variable_declarator());
        }
        if (eat_semi) attach(node, eat(";"));
        return node;
    }

    /// `(` keyword … `)` clause that introduces if/while/switch bodies. The
    /// leading keyword terminals (an absorbed `else`, then `if`/`while`/...)
    /// live inside this node so the statement's children stay exactly
    /// (condition, body...).
    int parse_condition_clause(int absorbed_else) {
        int node = make(NodeKind::Condition);
        if (absorbed_else >= 0) attach(node, absorbed_else);
        attach(node, term());  // if / while / switch keyword
        attach(node, eat("("));
        attach(node, parse_expression());
        attach(node, eat(")"));
        return node;
    }

    int parse_if_statement(int absorbed_else) {
        int node = make(NodeKind::IfStatement);
        attach(node, parse_condition_clause(absorbed_else));
        attach(node, parse_statement());
        if (cur().is("else")) {
            int else_term = term();
            if (cur().is("if")) {
                // else-if chain: nested IfStatement, 'else' kept in its clause
                attach(node, parse_if_statement(else_term));
            } else {
                int branch = parse_statement();
                attach_front(branch, else_term);
                attach(node, branch);
            }
        }
        return node;
    }

    int parse_while_statement() {
        int node = make(NodeKind::WhileStatement);
        attach(node, parse_condition_clause(-1));
        attach(node, parse_statement());
        return node;
    }

    int parse_do_statement() {
        int node = make(NodeKind::DoStatement);
        attach(node, eat("do"));
        attach(node, parse_statement());
        attach(node, eat("while"));
        attach(node, eat("("));
        attach(node, parse_expression());
        attach(node, eat(")"));
        attach(node, eat(";"));
        return node;
    }

    int parse_for_statement() {
        int node = make(NodeKind::ForStatement);
        int control = make(NodeKind::ForControl);
        attach(control, eat("for"));
        attach(control, eat("("));

        int enhanced = speculate([&] {
            int decl = parse_local_var_decl(/*eat_semi=*/false);
            if (!cur().is(":")) fail("not an enhanced for");
            return decl;
        });
        if (enhanced >= 0) {
            attach(control, enhanced);
            attach(control, eat(":"));
            attach(control, parse_expression());
            attach(control, eat(")"));
        } else {
            if (!cur().is(";")) {
                int init = speculate([&] { return parse_local_var_decl(false); });
                if (init >= 0) {
                    attach(control, init);
                } else {
                    attach(control, parse_expression());
                    while (cur().is(",")) {
                        attach(control, term());
                        attach(control, parse_expression());
                    }
                }
            }
            attach(control, eat(";"));
            if (!cur().is(";")) attach(control, parse_expression());
            attach(control, eat(";"));
            if (!cur().is(")")) {
                attach(control, parse_expression());
                while (cur().is(",")) {
                    attach(control, term());
                    attach(control, parse_expression());
                }
            }
            attach(control, eat(")"));
        }
        attach(node, control);
        attach(node, parse_statement());
        return node;
    }

    int parse_switch_statement() {
        int node = make(NodeKind::SwitchStatement);
        attach(node, parse_condition_clause(-1));
        attach(node, eat("{"));
        while (!cur().is("}")) {
            if (at_eof()) fail("unterminated switch");
            attach(node, parse_switch_case());
        }
        attach(node, eat("}"));
        return node;
    }

    int parse_switch_case() {
        int node = make(NodeKind::SwitchCase);
        if (cur().is("case")) {
            attach(node, term());
            attach(node, parse_expression());
        } else if (cur().is("default")) {
            attach(node, term());
        } else {
            fail("expected 'case' or 'default'");
        }
        attach(node, eat(":"));
        while (!cur().is("case") && !cur().is("default") && !cur().is("}")) {
            if (at_eof()) fail("unterminated switch case");
            attach(node, parse_statement());
        }
        return node;
    }

    int parse_return_statement() {
        int node = make(NodeKind::ReturnStatement);
        attach(node, eat("return"));
        if (!cur().is(";")) attach(node, parse_expression());
        attach(node, eat(";"));
        return node;
    }

    int parse_throw_statement() {
        int node = make(NodeKind::ThrowStatement);
        attach(node, eat("throw"));
        attach(node, parse_expression());
        attach(node, eat(";"));
        return node;
    }

    int parse_break_continue() {
        int node = make(cur().is("break") ? NodeKind::BreakStatement
                                          : NodeKind::ContinueStatement);
        attach(node, term());
        if (cur().type == TokenType::Identifier) attach(node, term());  // label
        attach(node, eat(";"));
        return node;
    }

    int parse_try_statement() {
        int node = make(NodeKind::TryStatement);
        attach(node, eat("try"));
        if (cur().is("(")) {  // try-with-resources
            attach(node, term());
            attach(node, parse_local_var_decl(false));
            while (cur().is(";") && !la(1).is(")")) {
                attach(node, term());
                attach(node, parse_local_var_decl(false));
            }
            if (cur().is(";")) attach(node, term());
            attach(node, eat(")"));
        }
        attach(node, parse_block());
        bool handled = false;
        while (cur().is("catch")) {
            handled = true;
            int clause = make(NodeKind::CatchClause);
            attach(clause, term());
            attach(clause, eat("("));
            attach(clause, parse_catch_parameter());
            attach(clause, eat(")"));
            attach(clause, parse_block());
            attach(node, clause);
        }
        if (cur().is("finally")) {
            handled = true;
            attach(node, term());
            attach(node, parse_block());
        }
        if (!handled) fail("try without catch or finally");
        return node;
    }

    int parse_catch_parameter() {
        int node = make(NodeKind::FormalParameter);
        if (cur().is("final")) attach(node, term());
        int type = parse_type();
        while (cur().is("|")) {  // multi-catch: keep union inside the type node
            attach(type, term());
            int extra = parse_type();
            attach(type, extra);
        }
        attach(node, type);
        attach(node, eat_identifier());
        return node;
    }

    // --- expressions --------------------------------------------------------

    int parse_expression() { return parse_assignment(); }

    int parse_assignment() {
        int lhs = parse_ternary();
        if (is_assign_op(cur())) {
            int node = make(NodeKind::Assignment);
            attach(node, lhs);
            attach(node, term());
            attach(node, parse_assignment());
            return node;
        }
        return lhs;
    }

    int parse_ternary() {
        int cond = parse_binary(0);
        if (!cur().is("?")) return cond;
        int node = make(NodeKind::TernaryExpression);
        attach(node, cond);
        attach(node, eat("?"));
        attach(node, parse_expression());
        attach(node, eat(":"));
        attach(node, parse_ternary());
        return node;
    }

    // Binary operators by precedence level, loosest first.
    static int binary_level(const Token& t) {
        if (t.type != TokenType::Operator && !t.is("instanceof")) return -1;
        if (t.is("||")) return 0;
        if (t.is("&&")) return 1;
        if (t.is("|")) return 2;
        if (t.is("^")) return 3;
        if (t.is("&")) return 4;
        if (t.is("==") || t.is("!=")) return 5;
        if (t.is("<") || t.is(">") || t.is("<=") || t.is(">=") || t.is("instanceof")) return 6;
        if (t.is("<<") || t.is(">>") || t.is(">>>")) return 7;
        if (t.is("+") || t.is("-")) return 8;
        if (t.is("*") || t.is("/") || t.is("%")) return 9;
        return -1;
    }

    int parse_binary(int level) {
        if (level > 9) return parse_unary();
        int lhs = parse_binary(level + 1);
        while (binary_level(cur()) == level) {
            int node = make(NodeKind::BinaryOperation);
            attach(node, lhs);
            bool is_instanceof = cur().is("instanceof");
            attach(node, term());
            attach(node, is_instanceof ? parse_type() : parse_binary(level + 1));
            lhs = node;
        }
        return lhs;
    }

    int parse_unary() {
        const Token& t = cur();
        if (t.is("+") || t.is("-") || t.is("!") || t.is("~") || t.is("++") || t.is("--")) {
            int node = make(NodeKind::UnaryOperation);
            attach(node, term());
            attach(node, parse_unary());
            return node;
        }
        if (t.is("(")) {
            int cast = speculate([&] { return parse_cast(); });
            if (cast >= 0) return cast;
        }
        return parse_postfix();
    }

    int parse_cast() {
        int node = make(NodeKind::CastExpression);
        attach(node, eat("("));
        bool basic = is_basic_type(cur());
        attach(node, parse_type());
        attach(node, eat(")"));
        if (!basic) {
            // Reference cast is ambiguous with a parenthesized expression;
            // only commit when what follows can start an operand.
            const Token& next = cur();
            bool operand = next.type == TokenType::Identifier || next.is_literal() ||
                           next.is("(") || next.is("!") || next.is("~") || next.is("this") ||
                           next.is("super") || next.is("new");
            if (!operand) fail("not a cast");
        }
        attach(node, parse_unary());
        return node;
    }

    int parse_postfix() {
        int expr = parse_primary();
        while (true) {
            if (cur().is(".")) {
                if (la(1).type == TokenType::Identifier && la(2).is("(")) {
                    int node = make(NodeKind::MethodInvocation);
                    attach(node, expr);
                    attach(node, term());  // .
                    attach(node, term());  // name
                    parse_arguments(node);
                    expr = node;
                } else if (la(1).type == TokenType::Identifier || la(1).is("this") ||
                           la(1).is("class")) {
                    int node = make(NodeKind::FieldAccess);
                    attach(node, expr);
                    attach(node, term());
                    attach(node, term());
                    expr = node;
                } else {
                    fail("unsupported member access");
                }
            } else if (cur().is("[")) {
                int node = make(NodeKind::ArrayAccess);
                attach(node, expr);
                attach(node, term());
                attach(node, parse_expression());
                attach(node, eat("]"));
                expr = node;
            } else if (cur().is("++") || cur().is("--")) {
                int node = make(NodeKind::UnaryOperation);
                attach(node, expr);
                attach(node, term());
                expr = node;
            } else if (cur().is("::")) {
                int node = make(NodeKind::ExpressionOther);
                attach(node, expr);
                attach(node, term());
                if (cur().is("new"))
                    attach(node, term());
                else
                    attach(node, eat_identifier());
                expr = node;
            } else {
                break;
            }
        }
        return expr;
    }

    void parse_arguments(int node) {
        attach(node, eat("("));
        if (!cur().is(")")) {
            attach(node, parse_expression());
            while (cur().is(",")) {
                attach(node, term());
                attach(node, parse_expression());
            }
        }
        attach(node, eat(")"));
    }

    int parse_primary() {
        const Token& t = cur();
        if (t.is_literal()) return term();
        if (t.is("(")) {
            int node = make(NodeKind::ParenExpression);
            attach(node, term());
            attach(node, parse_expression());
            attach(node, eat(")"));
            return node;
        }
        if (t.is("new")) return parse_creation();
        if (t.is("this") || t.is("super")) {
            if (la(1).is("(")) {
                int node = make(NodeKind::MethodInvocation);
                attach(node, term());
                parse_arguments(node);
                return node;
            }
            return term();
        }
        if (t.type == TokenType::Identifier) {
            if (la(1).is("(")) {
                int node = make(NodeKind::MethodInvocation);
                attach(node, term());
                parse_arguments(node);
                return node;
            }
            return term();
        }
        fail("expected expression");
    }

    int parse_creation() {
        int new_term = eat("new");
        // Type without trailing dims; '[' after the type name means array.
        int type;
        if (is_basic_type(cur())) {
            type = make(NodeKind::BasicType);
            attach(type, term());
        } else {
            type = make(NodeKind::ReferenceType);
            attach(type, eat_identifier());
            while (cur().is(".") && la(1).type == TokenType::Identifier) {
                attach(type, term());
                attach(type, eat_identifier());
            }
            if (cur().is("<")) parse_type_arguments(type);
        }
        if (cur().is("[")) {
            int node = make(NodeKind::ArrayCreation);
            attach(node, new_term);
            attach(node, type);
            bool sized = false;
            while (cur().is("[")) {
                attach(node, term());
                if (!cur().is("]")) {
                    attach(node, parse_expression());
                    sized = true;
                }
                attach(node, eat("]"));
            }
            if (!sized || cur().is("{")) {
                if (cur().is("{")) attach(node, parse_array_initializer());
            }
            return node;
        }
        int node = make(NodeKind::ObjectCreation);
        attach(node, new_term);
        attach(node, type);
        parse_arguments(node);
        if (cur().is("{")) fail("anonymous class bodies are not supported");
        return node;
    }
};

}  // namespace

std::string_view node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::Terminal: return "Terminal";
        case NodeKind::ClassDeclaration: return "ClassDeclaration";
        case NodeKind::MethodDeclaration: return "MethodDeclaration";
        case NodeKind::ConstructorDeclaration: return "ConstructorDeclaration";
        case NodeKind::FieldDeclaration: return "FieldDeclaration";
        case NodeKind::FormalParameter: return "FormalParameter";
        case NodeKind::Annotation: return "Annotation";
        case NodeKind::TypeParameters: return "TypeParameters";
        case NodeKind::BasicType: return "BasicType";
        case NodeKind::ReferenceType: return "ReferenceType";
        case NodeKind::BlockStatement: return "BlockStatement";
        case NodeKind::IfStatement: return "IfStatement";
        case NodeKind::Condition: return "Condition";
        case NodeKind::WhileStatement: return "WhileStatement";
        case NodeKind::DoStatement: return "DoStatement";
        case NodeKind::ForStatement: return "ForStatement";
        case NodeKind::ForControl: return "ForControl";
        case NodeKind::SwitchStatement: return "SwitchStatement";
        case NodeKind::SwitchCase: return "SwitchCase";
        case NodeKind::ReturnStatement: return "ReturnStatement";
        case NodeKind::BreakStatement: return "BreakStatement";
        case NodeKind::ContinueStatement: return "ContinueStatement";
        case NodeKind::ThrowStatement: return "ThrowStatement";
        case NodeKind::TryStatement: return "TryStatement";
        case NodeKind::CatchClause: return "CatchClause";
        case NodeKind::LocalVariableDeclaration: return "LocalVariableDeclaration";
        case NodeKind::VariableDeclarator: return "VariableDeclarator";
        case NodeKind::ExpressionStatement: return "ExpressionStatement";
        case NodeKind::StatementOther: return "StatementOther";
        case NodeKind::Assignment: return "Assignment";
        case NodeKind::TernaryExpression: return "TernaryExpression";
        case NodeKind::BinaryOperation: return "BinaryOperation";
        case NodeKind::UnaryOperation: return "UnaryOperation";
        case NodeKind::MethodInvocation: return "MethodInvocation";
        case NodeKind::FieldAccess: return "FieldAccess";
        case NodeKind::ArrayAccess: return "ArrayAccess";
        case NodeKind::ObjectCreation: return "ObjectCreation";
        case NodeKind::ArrayCreation: return "ArrayCreation";
        case NodeKind::ArrayInitializer: return "ArrayInitializer";
        case NodeKind::CastExpression: return "CastExpression";
        case NodeKind::ParenExpression: return "ParenExpression";
        case NodeKind::ExpressionOther: return "ExpressionOther";
    }
    return "Unknown";
}

std::string AstTree::label(int id) const {
    const AstNode& n = node(id);
    if (n.kind == NodeKind::Terminal) return n.token;
    return std::string(node_kind_name(n.kind));
}

AstTree parse_fragment(const SourceFragment& fragment) {
    auto parse_as = [&](Granularity g) {
        Parser parser(lex_java(fragment.code));
        int root = (g == Granularity::Method) ? parser.parse_method_fragment()
                                              : parser.parse_class_fragment();
        return parser.finalize(root, fragment.id);
    };
    try {
        return parse_as(fragment.granularity);
    } catch (const ParseError& primary) {
        Granularity other = fragment.granularity == Granularity::Method
                                ? Granularity::Class
                                : Granularity::Method;
        try {
            parse_as(other);
        } catch (const ParseError&) {
            throw primary;  // invalid either way: report the stated-granularity error
        }
        raise(ErrorCode::Granularity,
              "fragment '" + fragment.id + "' parses as " +
                  (other == Granularity::Class ? "a class" : "a method") +
                  ", not the stated granularity");
    }
}

std::vector<int> terminals_in_order(const AstTree& tree) {
    std::vector<int> out;
    std::function<void(int)> walk = [&](int id) {
        const AstNode& n = tree.node(id);
        if (n.kind == NodeKind::Terminal) out.push_back(id);
        for (int c : n.children) walk(c);
    };
    if (!tree.nodes.empty()) walk(tree.root);
    return out;
}

}  // namespace faast
