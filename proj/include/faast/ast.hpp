#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace faast {

enum class Granularity { Method, Class };

/// One Java source fragment as stored in a corpus.
struct SourceFragment {
    std::string id;
    std::string code;
    Granularity granularity = Granularity::Method;
};

/// Closed vocabulary of AST node kinds. Every token of the source appears
/// as a Terminal leaf; nonterminals cover the productions the flow rules
/// key on plus a pair of catch-alls for anything else.
enum class NodeKind : std::uint8_t {
    Terminal,

    // declarations
    ClassDeclaration,
    MethodDeclaration,
    ConstructorDeclaration,
    FieldDeclaration,
    FormalParameter,
    Annotation,
    TypeParameters,
    BasicType,
    ReferenceType,

    // statements
    BlockStatement,
    IfStatement,
    Condition,
    WhileStatement,
    DoStatement,
    ForStatement,
    ForControl,
    SwitchStatement,
    SwitchCase,
    ReturnStatement,
    BreakStatement,
    ContinueStatement,
    ThrowStatement,
    TryStatement,
    CatchClause,
    LocalVariableDeclaration,
    VariableDeclarator,
    ExpressionStatement,
    StatementOther,

    // expressions
    Assignment,
    TernaryExpression,
    BinaryOperation,
    UnaryOperation,
    MethodInvocation,
    FieldAccess,
    ArrayAccess,
    ObjectCreation,
    ArrayCreation,
    ArrayInitializer,
    CastExpression,
    ParenExpression,
    ExpressionOther,
};

std::string_view node_kind_name(NodeKind kind);

struct AstNode {
    int node_id = -1;
    NodeKind kind = NodeKind::Terminal;
    std::string token;           // non-empty iff kind == Terminal
    std::vector<int> children;   // node ids, source order
};

/// Normalized parse result: nodes indexed by id, ids assigned in pre-order,
/// root is node 0.
struct AstTree {
    std::string fragment_id;
    std::vector<AstNode> nodes;
    int root = 0;

    int size() const { return static_cast<int>(nodes.size()); }
    const AstNode& node(int id) const { return nodes[static_cast<size_t>(id)]; }
    bool is_terminal(int id) const { return node(id).kind == NodeKind::Terminal; }

    /// Node label as consumed by the embedding vocabulary: the token text
    /// for terminals, the kind name for nonterminals.
    std::string label(int id) const;
};

inline bool is_statement_kind(NodeKind k) {
    switch (k) {
        case NodeKind::BlockStatement:
        case NodeKind::IfStatement:
        case NodeKind::WhileStatement:
        case NodeKind::DoStatement:
        case NodeKind::ForStatement:
        case NodeKind::SwitchStatement:
        case NodeKind::ReturnStatement:
        case NodeKind::BreakStatement:
        case NodeKind::ContinueStatement:
        case NodeKind::ThrowStatement:
        case NodeKind::TryStatement:
        case NodeKind::LocalVariableDeclaration:
        case NodeKind::ExpressionStatement:
        case NodeKind::StatementOther:
            return true;
        default:
            return false;
    }
}

}  // namespace faast
