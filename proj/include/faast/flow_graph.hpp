#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "faast/ast.hpp"

namespace faast {

/// Typed edges of the flow-augmented AST. Forward kinds first, then the
/// dedicated backward kinds; Child/Parent and the loop pairs WhileExec/
/// WhileNext, ForExec/ForNext already come in both directions and get no
/// extra backward kind.
enum class EdgeType : std::uint8_t {
    Child,
    Parent,
    NextSib,
    NextToken,
    NextUse,
    CondTrue,
    CondFalse,
    WhileExec,
    WhileNext,
    ForExec,
    ForNext,
    NextStmt,
    PrevSib,
    PrevToken,
    PrevUse,
    CondTrueBack,
    CondFalseBack,
    NextStmtBack,
};

inline constexpr int kNumEdgeTypes = 18;

std::string_view edge_type_name(EdgeType t);
EdgeType edge_type_from_name(std::string_view name);

/// Backward kind paired with a forward kind, or nullopt semantics via -1.
/// Only the six forward kinds without an inherent reverse are mapped.
bool has_backward_pair(EdgeType t);
EdgeType backward_pair(EdgeType t);

struct Edge {
    int src = 0;
    int dst = 0;
    EdgeType type = EdgeType::Child;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct FlowGraph {
    std::string fragment_id;
    int num_nodes = 0;
    std::vector<std::string> node_labels;
    std::vector<Edge> edges;
};

namespace fa_ast {

// Individual edge builders, exposed for testing; `build` is the entry point.
std::vector<Edge> add_ast_edges(const AstTree& tree);
std::vector<Edge> add_sibling_edges(const AstTree& tree);
std::vector<Edge> add_token_edges(const AstTree& tree);
std::vector<Edge> add_next_use_edges(const AstTree& tree);
std::vector<Edge> add_control_flow_edges(const AstTree& tree);

/// Append the paired backward edge for every forward edge of a kind that
/// lacks an inherent reverse. Edges already paired are left untouched.
void add_backward_edges(FlowGraph& graph);

/// Full FA-AST construction: all builders, deduplicated, invariants checked.
FlowGraph build(const AstTree& tree);

/// Names of variables declared in the fragment (locals, parameters, fields).
std::vector<std::string> declared_variable_names(const AstTree& tree);

/// Throws Error{MalformedNode} if any FlowGraph invariant is violated.
void validate(const FlowGraph& graph);

enum class ExportFormat { DOT, JsonGraph };

std::string export_graph(const FlowGraph& graph, ExportFormat format);
FlowGraph import_json(const std::string& text);

/// Per-edge-type histogram, indexed by EdgeType value.
std::vector<int> edge_type_histogram(const FlowGraph& graph);

}  // namespace fa_ast

}  // namespace faast
