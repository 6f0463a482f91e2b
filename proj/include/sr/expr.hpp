#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sr/config.hpp"
#include "sr/rng.hpp"

namespace sr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class UnaryFn { Neg, Sqrt, Log, Sin, Cos, Exp, UnitStep };

struct Variable {
    int index;  // 0-based column index
    friend bool operator==(const Variable&, const Variable&) = default;
};
struct Constant {
    double value;  // finite, dimensionless
    friend bool operator==(const Constant&, const Constant&) = default;
};

using NodeKind = std::variant<BinaryOp, UnaryFn, Variable, Constant>;

// One node of an expression tree. Binary operators use both children;
// unary functions use `left` and may carry an unevaluated dormant
// subtree in `right`; terminals have no children.
struct Node {
    NodeKind kind;
    std::unique_ptr<Node> left;
    std::unique_ptr<Node> right;

    bool is_terminal() const {
        return std::holds_alternative<Variable>(kind) || std::holds_alternative<Constant>(kind);
    }
    bool is_unary() const { return std::holds_alternative<UnaryFn>(kind); }
    bool is_binary() const { return std::holds_alternative<BinaryOp>(kind); }
    bool has_dormant() const { return is_unary() && right != nullptr; }
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make_var(int index);
NodePtr make_const(double value);
NodePtr make_unary(UnaryFn fn, NodePtr arg, NodePtr dormant = nullptr);
NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs);

class ExpressionTree {
public:
    ExpressionTree() = default;
    explicit ExpressionTree(NodePtr root) : root_(std::move(root)) {}

    ExpressionTree(const ExpressionTree& other);
    ExpressionTree& operator=(const ExpressionTree& other);
    ExpressionTree(ExpressionTree&&) = default;
    ExpressionTree& operator=(ExpressionTree&&) = default;

    const Node* root() const { return root_.get(); }
    Node* root() { return root_.get(); }
    bool empty() const { return root_ == nullptr; }

    int depth() const;
    int node_count() const;  // includes dormant subtrees

    friend bool operator==(const ExpressionTree& a, const ExpressionTree& b);

private:
    NodePtr root_;
};

NodePtr clone(const Node& node);
int subtree_depth(const Node& node);
int subtree_size(const Node& node);
bool structurally_equal(const Node* a, const Node* b);

struct EvalContext {
    std::span<const double> row;
};

// Tree-walking evaluation. Dormant children are skipped. Any non-finite
// intermediate (division by zero, log of a non-positive value, sqrt of a
// negative value, non-real powers) makes the whole result invalid,
// reported as nullopt.
std::optional<double> evaluate(const ExpressionTree& tree, const EvalContext& ctx);
std::optional<double> evaluate_node(const Node& node, std::span<const double> row);

// Canonical text form: fully parenthesized infix for binary operators,
// call syntax for unary functions, `v<k>` 1-based variable names, and a
// `[dormant: ...]` annotation so round-trips are lossless.
std::string serialize(const ExpressionTree& tree);
std::string serialize_node(const Node& node);

struct ParseError : std::runtime_error {
    ParseError(std::size_t pos, const std::string& reason);
    std::size_t position;
};

// Inverse of serialize. `columns`, when given, additionally resolves bare
// identifiers to variable indices by column name.
ExpressionTree parse(const std::string& text,
                     std::span<const std::string> columns = {});

// Random expression respecting the depth cap; at the last level a
// terminal is forced. With fill_to_max, every node above the cap is a
// non-terminal.
ExpressionTree random_tree(const Config& cfg, Rng& rng, bool fill_to_max);
NodePtr random_subtree(const Config& cfg, Rng& rng, int depth_budget, bool fill_to_max);
NodePtr random_terminal(const Config& cfg, Rng& rng);

// Biased node pick for genetic operations: with probability
// `internal_bias` choose uniformly among internal nodes, otherwise among
// terminals; an empty class falls back to the other one. Dormant
// subtrees are eligible.
Node* pick_node(ExpressionTree& tree, Rng& rng, double internal_bias);

// All node pointers in preorder, dormant subtrees included.
void collect_nodes(Node& node, std::vector<Node*>& out);
void collect_nodes(const Node& node, std::vector<const Node*>& out);

}  // namespace sr
