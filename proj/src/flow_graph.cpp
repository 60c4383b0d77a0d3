#include "faast/flow_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "faast/errors.hpp"
#include "faast/java_lexer.hpp"
#include "faast/java_parser.hpp"

namespace faast {

namespace {

constexpr std::string_view kEdgeNames[kNumEdgeTypes] = {
    "Child",     "Parent",    "NextSib",  "NextToken",    "NextUse",
    "CondTrue",  "CondFalse", "WhileExec", "WhileNext",   "ForExec",
    "ForNext",   "NextStmt",  "PrevSib",  "PrevToken",    "PrevUse",
    "CondTrueBack", "CondFalseBack", "NextStmtBack",
};

}  // namespace

std::string_view edge_type_name(EdgeType t) {
    return kEdgeNames[static_cast<int>(t)];
}

EdgeType edge_type_from_name(std::string_view name) {
    for (int i = 0; i < kNumEdgeTypes; ++i)
        if (kEdgeNames[i] == name) return static_cast<EdgeType>(i);
    raise(ErrorCode::Io, "unknown edge type '" + std::string(name) + "'");
}

bool has_backward_pair(EdgeType t) {
    switch (t) {
        case EdgeType::NextSib:
        case EdgeType::NextToken:
        case EdgeType::NextUse:
        case EdgeType::CondTrue:
        case EdgeType::CondFalse:
        case EdgeType::NextStmt:
            return true;
        default:
            return false;
    }
}

EdgeType backward_pair(EdgeType t) {
    switch (t) {
        case EdgeType::NextSib: return EdgeType::PrevSib;
        case EdgeType::NextToken: return EdgeType::PrevToken;
        case EdgeType::NextUse: return EdgeType::PrevUse;
        case EdgeType::CondTrue: return EdgeType::CondTrueBack;
        case EdgeType::CondFalse: return EdgeType::CondFalseBack;
        case EdgeType::NextStmt: return EdgeType::NextStmtBack;
        default:
            raise(ErrorCode::MalformedNode,
                  "edge type has no backward pair: " + std::string(edge_type_name(t)));
    }
}

namespace fa_ast {

std::vector<Edge> add_ast_edges(const AstTree& tree) {
    std::vector<Edge> out;
    for (const AstNode& n : tree.nodes) {
        for (int c : n.children) {
            out.push_back({n.node_id, c, EdgeType::Child});
            out.push_back({c, n.node_id, EdgeType::Parent});
        }
    }
    return out;
}

std::vector<Edge> add_sibling_edges(const AstTree& tree) {
    std::vector<Edge> out;
    for (const AstNode& n : tree.nodes) {
        for (size_t i = 0; i + 1 < n.children.size(); ++i)
            out.push_back({n.children[i], n.children[i + 1], EdgeType::NextSib});
    }
    return out;
}

std::vector<Edge> add_token_edges(const AstTree& tree) {
    std::vector<Edge> out;
    std::vector<int> terms = terminals_in_order(tree);
    for (size_t i = 0; i + 1 < terms.size(); ++i)
        out.push_back({terms[i], terms[i + 1], EdgeType::NextToken});
    return out;
}

std::vector<std::string> declared_variable_names(const AstTree& tree) {
    std::set<std::string> names;
    for (const AstNode& n : tree.nodes) {
        if (n.kind != NodeKind::VariableDeclarator && n.kind != NodeKind::FormalParameter)
            continue;
        for (int c : n.children) {
            const AstNode& child = tree.node(c);
            if (child.kind == NodeKind::Terminal && is_java_identifier(child.token)) {
                names.insert(child.token);
                break;
            }
        }
    }
    return {names.begin(), names.end()};
}

std::vector<Edge> add_next_use_edges(const AstTree& tree) {
    std::unordered_set<std::string> declared;
    for (auto& name : declared_variable_names(tree)) declared.insert(name);

    std::vector<Edge> out;
    std::unordered_map<std::string, int> last_seen;
    for (int id : terminals_in_order(tree)) {
        const std::string& tok = tree.node(id).token;
        if (!declared.count(tok)) continue;
        auto it = last_seen.find(tok);
        if (it != last_seen.end()) out.push_back({it->second, id, EdgeType::NextUse});
        last_seen[tok] = id;
    }
    return out;
}

std::vector<Edge> add_control_flow_edges(const AstTree& tree) {
    std::vector<Edge> out;
    for (const AstNode& n : tree.nodes) {
        const auto& ch = n.children;
        switch (n.kind) {
            case NodeKind::IfStatement: {
                if (ch.size() < 2 || ch.size() > 3)
                    raise(ErrorCode::MalformedNode,
                          "IfStatement with " + std::to_string(ch.size()) + " children");
                out.push_back({ch[0], ch[1], EdgeType::CondTrue});
                if (ch.size() == 3) out.push_back({ch[0], ch[2], EdgeType::CondFalse});
                break;
            }
            case NodeKind::WhileStatement: {
                if (ch.size() != 2)
                    raise(ErrorCode::MalformedNode,
                          "WhileStatement with " + std::to_string(ch.size()) + " children");
                out.push_back({ch[0], ch[1], EdgeType::WhileExec});
                out.push_back({ch[1], ch[0], EdgeType::WhileNext});
                break;
            }
            case NodeKind::ForStatement: {
                if (ch.size() != 2)
                    raise(ErrorCode::MalformedNode,
                          "ForStatement with " + std::to_string(ch.size()) + " children");
                out.push_back({ch[0], ch[1], EdgeType::ForExec});
                out.push_back({ch[1], ch[0], EdgeType::ForNext});
                break;
            }
            case NodeKind::BlockStatement: {
                int prev = -1;
                for (int c : ch) {
                    if (!is_statement_kind(tree.node(c).kind)) continue;
                    if (prev >= 0) out.push_back({prev, c, EdgeType::NextStmt});
                    prev = c;
                }
                break;
            }
            default:
                break;
        }
    }
    return out;
}

void add_backward_edges(FlowGraph& graph) {
    size_t n = graph.edges.size();
    for (size_t i = 0; i < n; ++i) {
        const Edge& e = graph.edges[i];
        if (has_backward_pair(e.type))
            graph.edges.push_back({e.dst, e.src, backward_pair(e.type)});
    }
}

FlowGraph build(const AstTree& tree) {
    FlowGraph g;
    g.fragment_id = tree.fragment_id;
    g.num_nodes = tree.size();
    g.node_labels.reserve(tree.nodes.size());
    for (const AstNode& n : tree.nodes) g.node_labels.push_back(tree.label(n.node_id));

    auto append = [&](std::vector<Edge>&& edges) {
        for (Edge& e : edges) g.edges.push_back(e);
    };
    append(add_ast_edges(tree));
    append(add_sibling_edges(tree));
    append(add_token_edges(tree));
    append(add_next_use_edges(tree));
    append(add_control_flow_edges(tree));
    add_backward_edges(g);

    // Overlapping rules may produce the same typed edge twice; duplicates
    // would double-count messages in the aggregation sum.
    std::set<Edge> seen;
    std::vector<Edge> unique;
    unique.reserve(g.edges.size());
    for (const Edge& e : g.edges)
        if (seen.insert(e).second) unique.push_back(e);
    g.edges = std::move(unique);

    validate(g);
    return g;
}

void validate(const FlowGraph& graph) {
    auto bad = [](const std::string& msg) {
        raise(ErrorCode::MalformedNode, "invalid FlowGraph: " + msg);
    };

    std::set<Edge> all;
    for (const Edge& e : graph.edges) {
        if (e.src < 0 || e.src >= graph.num_nodes || e.dst < 0 || e.dst >= graph.num_nodes)
            bad("edge endpoint out of range");
        if (e.src == e.dst) bad("self-loop");
        if (!all.insert(e).second) bad("duplicate edge");
    }
    auto has = [&](int s, int d, EdgeType t) { return all.count({s, d, t}) > 0; };

    for (const Edge& e : graph.edges) {
        switch (e.type) {
            case EdgeType::Child:
                if (!has(e.dst, e.src, EdgeType::Parent)) bad("Child without Parent");
                break;
            case EdgeType::Parent:
                if (!has(e.dst, e.src, EdgeType::Child)) bad("Parent without Child");
                break;
            case EdgeType::WhileExec:
                if (!has(e.dst, e.src, EdgeType::WhileNext)) bad("WhileExec without WhileNext");
                break;
            case EdgeType::WhileNext:
                if (!has(e.dst, e.src, EdgeType::WhileExec)) bad("WhileNext without WhileExec");
                break;
            case EdgeType::ForExec:
                if (!has(e.dst, e.src, EdgeType::ForNext)) bad("ForExec without ForNext");
                break;
            case EdgeType::ForNext:
                if (!has(e.dst, e.src, EdgeType::ForExec)) bad("ForNext without ForExec");
                break;
            default:
                if (has_backward_pair(e.type)) {
                    if (!has(e.dst, e.src, backward_pair(e.type)))
                        bad(std::string(edge_type_name(e.type)) + " without backward edge");
                }
                break;
        }
    }
    std::vector<int> hist = edge_type_histogram(graph);
    auto count_of = [&](EdgeType t) { return hist[static_cast<int>(t)]; };
    for (EdgeType t : {EdgeType::NextSib, EdgeType::NextToken, EdgeType::NextUse,
                       EdgeType::CondTrue, EdgeType::CondFalse, EdgeType::NextStmt}) {
        if (count_of(t) != count_of(backward_pair(t)))
            bad(std::string(edge_type_name(t)) + " count differs from backward count");
    }
    if (count_of(EdgeType::Child) != count_of(EdgeType::Parent))
        bad("Child/Parent count mismatch");
    if (count_of(EdgeType::WhileExec) != count_of(EdgeType::WhileNext))
        bad("WhileExec/WhileNext count mismatch");
    if (count_of(EdgeType::ForExec) != count_of(EdgeType::ForNext))
        bad("ForExec/ForNext count mismatch");

    // NextToken edges must form one simple path: every node has at most one
    // incoming and one outgoing NextToken edge, with exactly one chain.
    std::map<int, int> out_deg, in_deg;
    int token_edges = 0;
    for (const Edge& e : graph.edges) {
        if (e.type != EdgeType::NextToken) continue;
        ++token_edges;
        if (++out_deg[e.src] > 1) bad("NextToken branches");
        if (++in_deg[e.dst] > 1) bad("NextToken merges");
    }
    if (token_edges > 0) {
        int starts = 0;
        for (auto& [node, deg] : out_deg)
            if (!in_deg.count(node)) ++starts;
        if (starts != 1) bad("NextToken chain is not a single path");
    }
}

std::vector<int> edge_type_histogram(const FlowGraph& graph) {
    std::vector<int> hist(kNumEdgeTypes, 0);
    for (const Edge& e : graph.edges) ++hist[static_cast<int>(e.type)];
    return hist;
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string export_graph(const FlowGraph& graph, ExportFormat format) {
    if (format == ExportFormat::DOT) {
        std::ostringstream os;
        os << "digraph fa_ast {\n";
        for (int i = 0; i < graph.num_nodes; ++i)
            os << "  n" << i << " [label=\"" << dot_escape(graph.node_labels[i]) << "\"];\n";
        for (const Edge& e : graph.edges)
            os << "  n" << e.src << " -> n" << e.dst << " [label=\""
               << edge_type_name(e.type) << "\"];\n";
        os << "}\n";
        return os.str();
    }
    nlohmann::json j;
    j["fragment_id"] = graph.fragment_id;
    j["num_nodes"] = graph.num_nodes;
    j["labels"] = graph.node_labels;
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : graph.edges)
        edges.push_back({e.src, e.dst, std::string(edge_type_name(e.type))});
    j["edges"] = std::move(edges);
    return j.dump();
}

FlowGraph import_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::Io, std::string("bad graph json: ") + e.what());
    }
    FlowGraph g;
    try {
        g.fragment_id = j.at("fragment_id").get<std::string>();
        g.num_nodes = j.at("num_nodes").get<int>();
        g.node_labels = j.at("labels").get<std::vector<std::string>>();
        for (const auto& e : j.at("edges"))
            g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                               edge_type_from_name(e.at(2).get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::Io, std::string("bad graph json: ") + e.what());
    }
    if (static_cast<int>(g.node_labels.size()) != g.num_nodes)
        raise(ErrorCode::Io, "bad graph json: label count != num_nodes");
    return g;
}

}  // namespace fa_ast

}  // namespace faast
