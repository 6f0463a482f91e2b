#pragma once

#include <optional>
#include <string>
#include <unordered_map>

#include "sr/expr.hpp"

namespace sr {

struct DimViolation {
    const Node* where = nullptr;
    std::string rule;
};

// Accepting result carries the inferred dimension; otherwise the first
// violated rule found bottom-up.
struct DimResult {
    std::optional<Dim> dim;
    DimViolation violation;

    bool ok() const { return dim.has_value(); }
};

// Bottom-up dimensional inference. Dormant subtrees are not inspected.
DimResult infer_dimension(const ExpressionTree& tree, const DimSignature& sig);
DimResult infer_dimension_node(const Node& node, const DimSignature& sig);

// Dimensions of every non-dormant subtree of a dimensionally valid tree.
// Empty map when the tree does not pass inference.
std::unordered_map<const Node*, Dim> annotate_dimensions(const ExpressionTree& tree,
                                                         const DimSignature& sig);

struct DimConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Builds a random tree whose inferred dimension equals `target`, with
// depth <= depth_budget, by recursive rule sampling with backtracking.
// Throws DimConstructionError when the target is unreachable with the
// given signature and budget.
ExpressionTree random_dim_tree(const Config& cfg, const DimSignature& sig, Dim target,
                               Rng& rng, int depth_budget);
NodePtr random_dim_subtree(const Config& cfg, const DimSignature& sig, Dim target,
                           Rng& rng, int depth_budget);

// Picks, with the usual internal-node bias applied inside the eligible
// set, a subtree whose inferred dimension equals `required`. Returns
// nullptr when no subtree qualifies.
Node* dim_preserving_pick(ExpressionTree& tree, Dim required, const DimSignature& sig,
                          Rng& rng, double internal_bias);

}  // namespace sr
