#include "sr/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sr {

namespace {

DimResult violation(const Node& node, std::string rule) {
    return DimResult{std::nullopt, DimViolation{&node, std::move(rule)}};
}

// A literal integer constant usable as a dimensionful-base exponent.
std::optional<int> literal_int(const Node& node) {
    const auto* c = std::get_if<Constant>(&node.kind);
    if (!c) return std::nullopt;
    double r = std::round(c->value);
    if (r != c->value) return std::nullopt;
    return static_cast<int>(r);
}

}  // namespace

DimResult infer_dimension_node(const Node& node, const DimSignature& sig) {
    if (const auto* v = std::get_if<Variable>(&node.kind)) {
        if (static_cast<std::size_t>(v->index) >= sig.var_dims.size())
            return violation(node, "variable not covered by dimension signature");
        return DimResult{sig.var_dims[v->index], {}};
    }
    if (std::holds_alternative<Constant>(node.kind)) return DimResult{0, {}};

    if (const auto* f = std::get_if<UnaryFn>(&node.kind)) {
        auto arg = infer_dimension_node(*node.left, sig);
        if (!arg.ok()) return arg;
        Dim d = *arg.dim;
        switch (*f) {
            case UnaryFn::Neg:
                return DimResult{d, {}};
            case UnaryFn::Sqrt:
                if (d % 2 != 0) return violation(node, "odd dimension under square root");
                return DimResult{d / 2, {}};
            default:
                if (d != 0)
                    return violation(node, "argument of a transcendental function must be dimensionless");
                return DimResult{0, {}};
        }
    }

    auto op = std::get<BinaryOp>(node.kind);
    auto lhs = infer_dimension_node(*node.left, sig);
    if (!lhs.ok()) return lhs;
    auto rhs = infer_dimension_node(*node.right, sig);
    if (!rhs.ok()) return rhs;
    Dim a = *lhs.dim, b = *rhs.dim;
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
            if (a != b) return violation(node, "addition of terms with different dimensions");
            return DimResult{a, {}};
        case BinaryOp::Mul:
            return DimResult{a + b, {}};
        case BinaryOp::Div:
            return DimResult{a - b, {}};
        case BinaryOp::Pow: {
            if (b != 0) return violation(node, "exponent must be dimensionless");
            if (a == 0) return DimResult{0, {}};
            auto k = literal_int(*node.right);
            if (!k) return violation(node, "dimensionful base requires a literal integer exponent");
            return DimResult{a * *k, {}};
        }
    }
    return violation(node, "unknown operator");
}

DimResult infer_dimension(const ExpressionTree& tree, const DimSignature& sig) {
    if (tree.empty()) return DimResult{std::nullopt, DimViolation{nullptr, "empty tree"}};
    return infer_dimension_node(*tree.root(), sig);
}

namespace {

bool annotate_rec(const Node& node, const DimSignature& sig,
                  std::unordered_map<const Node*, Dim>& out) {
    if (!node.is_terminal()) {
        if (!annotate_rec(*node.left, sig, out)) return false;
        if (node.is_binary() && !annotate_rec(*node.right, sig, out)) return false;
        // dormant right child of a unary node is skipped
    }
    auto r = infer_dimension_node(node, sig);
    if (!r.ok()) return false;
    out.emplace(&node, *r.dim);
    return true;
}

}  // namespace

std::unordered_map<const Node*, Dim> annotate_dimensions(const ExpressionTree& tree,
                                                         const DimSignature& sig) {
    std::unordered_map<const Node*, Dim> out;
    if (tree.empty() || !annotate_rec(*tree.root(), sig, out)) out.clear();
    return out;
}

// --- dimension-targeted construction --------------------------------------

namespace {

class DimBuilder {
public:
    DimBuilder(const Config& cfg, const DimSignature& sig, Rng& rng)
        : cfg_(cfg), sig_(sig), rng_(rng) {
        for (std::size_t i = 0; i < sig.var_dims.size(); ++i)
            (sig.var_dims[i] == 1 ? vars1_ : vars0_).push_back(static_cast<int>(i));
        attempts_ = cfg.dim_build_attempts * 8;
    }

    NodePtr build(Dim target, int budget) { return subtree(target, budget); }

private:
    const Config& cfg_;
    const DimSignature& sig_;
    Rng& rng_;
    std::vector<int> vars0_, vars1_;
    int attempts_;

    // Depth needed to reach dimension n from dim-0/1 terminals via the
    // production rules; an upper bound is enough for pruning.
    int min_depth(Dim n) const {
        if (n == 0) return 1;
        if (n > 0) return n;  // chain of (n-1)-dim x 1-dim
        return -n + 1;        // division chain down from 0
    }

    bool feasible(Dim n, int budget) const {
        if (n != 0 && vars1_.empty()) return false;
        return budget >= min_depth(n);
    }

    NodePtr terminal(Dim n) {
        if (n == 1) {
            if (vars1_.empty()) return nullptr;
            return make_var(vars1_[rng_.index(vars1_.size())]);
        }
        if (n != 0) return nullptr;
        if (!vars0_.empty() && !rng_.bernoulli(cfg_.p_const))
            return make_var(vars0_[rng_.index(vars0_.size())]);
        return make_const(rng_.uniform(cfg_.constant_min, cfg_.constant_max));
    }

    NodePtr dormant_leaf() {
        if (cfg_.dormant && rng_.bernoulli(cfg_.p_dormant)) return random_terminal(cfg_, rng_);
        return nullptr;
    }

    NodePtr binary(BinaryOp op, Dim da, Dim db, int budget) {
        auto a = subtree(da, budget - 1);
        if (!a) return nullptr;
        auto b = subtree(db, budget - 1);
        if (!b) return nullptr;
        return make_binary(op, std::move(a), std::move(b));
    }

    NodePtr unary(UnaryFn fn, Dim darg, int budget) {
        auto a = subtree(darg, budget - 1);
        if (!a) return nullptr;
        return make_unary(fn, std::move(a), dormant_leaf());
    }

    NodePtr subtree(Dim n, int budget) {
        if (attempts_ <= 0 || !feasible(n, budget)) return nullptr;
        if (budget <= 1) return terminal(n);

        using Rule = std::function<NodePtr()>;
        std::vector<std::pair<double, Rule>> rules;
        const OpProbs& p = cfg_.op_probs;

        if (n == 0 || n == 1) {
            double w = p.terminal();
            if (w > 0) rules.emplace_back(w, [&, n] { return terminal(n); });
        }
        if (feasible(n, budget - 1)) {
            rules.emplace_back(p.add, [&, n, budget] { return binary(BinaryOp::Add, n, n, budget); });
            rules.emplace_back(p.sub, [&, n, budget] { return binary(BinaryOp::Sub, n, n, budget); });
            rules.emplace_back(p.neg, [&, n, budget] { return unary(UnaryFn::Neg, n, budget); });
        }
        // multiplication: (n-1)-dim x 1-dim or n-dim x 0-dim, random side order
        {
            std::vector<std::pair<Dim, Dim>> splits;
            if (n != 0) {
                if (feasible(n - 1, budget - 1) && feasible(1, budget - 1)) splits.push_back({n - 1, 1});
                if (feasible(n, budget - 1)) splits.push_back({n, 0});
            } else if (feasible(0, budget - 1)) {
                splits.push_back({0, 0});
            }
            if (!splits.empty())
                rules.emplace_back(p.mul, [&, splits, budget] {
                    auto [da, db] = splits[rng_.index(splits.size())];
                    if (rng_.bernoulli(0.5)) std::swap(da, db);
                    return binary(BinaryOp::Mul, da, db, budget);
                });
        }
        // division: (n+1)-dim / 1-dim; for 0-dim also the ratio of two equal-dim terms
        {
            std::vector<std::pair<Dim, Dim>> splits;
            if (feasible(n + 1, budget - 1) && feasible(1, budget - 1)) splits.push_back({n + 1, 1});
            if (n == 0 && feasible(0, budget - 1)) splits.push_back({0, 0});
            if (!splits.empty())
                rules.emplace_back(p.div, [&, splits, budget] {
                    auto [da, db] = splits[rng_.index(splits.size())];
                    return binary(BinaryOp::Div, da, db, budget);
                });
        }
        if (feasible(2 * n, budget - 1))
            rules.emplace_back(p.sqrt, [&, n, budget] { return unary(UnaryFn::Sqrt, 2 * n, budget); });
        if (n == 0 && feasible(0, budget - 1)) {
            rules.emplace_back(p.log, [&, budget] { return unary(UnaryFn::Log, 0, budget); });
            rules.emplace_back(p.sin, [&, budget] { return unary(UnaryFn::Sin, 0, budget); });
            rules.emplace_back(p.cos, [&, budget] { return unary(UnaryFn::Cos, 0, budget); });
            rules.emplace_back(p.exp, [&, budget] { return unary(UnaryFn::Exp, 0, budget); });
            rules.emplace_back(p.step, [&, budget] { return unary(UnaryFn::UnitStep, 0, budget); });
        }
        // power: dimensionless base freely; dimensionful base needs a
        // literal integer exponent k with n = d(base) * k
        {
            std::vector<int> ks;
            if (n != 0) {
                for (int k = -cfg_.max_pow_exponent; k <= cfg_.max_pow_exponent; ++k) {
                    if (k == 0 || k == 1 || n % k != 0) continue;
                    if (feasible(n / k, budget - 1)) ks.push_back(k);
                }
                if (!ks.empty())
                    rules.emplace_back(p.pow, [&, ks, budget, n] {
                        int k = ks[rng_.index(ks.size())];
                        auto base = subtree(n / k, budget - 1);
                        if (!base) return NodePtr();
                        return make_binary(BinaryOp::Pow, std::move(base),
                                           make_const(static_cast<double>(k)));
                    });
            } else if (feasible(0, budget - 1)) {
                rules.emplace_back(p.pow, [&, budget] { return binary(BinaryOp::Pow, 0, 0, budget); });
            }
        }

        // weighted sampling without replacement across applicable rules
        std::erase_if(rules, [](const auto& r) { return r.first <= 0.0; });
        while (!rules.empty() && attempts_ > 0) {
            double total = 0.0;
            for (auto& [w, fn] : rules) total += w;
            double r = rng_.uniform(0.0, total);
            std::size_t idx = rules.size() - 1;
            for (std::size_t i = 0; i < rules.size(); ++i) {
                if (r < rules[i].first) {
                    idx = i;
                    break;
                }
                r -= rules[i].first;
            }
            if (auto node = rules[idx].second()) return node;
            --attempts_;
            rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(idx));
        }
        return nullptr;
    }
};

}  // namespace

NodePtr random_dim_subtree(const Config& cfg, const DimSignature& sig, Dim target,
                           Rng& rng, int depth_budget) {
    for (int attempt = 0; attempt < cfg.dim_build_attempts; ++attempt) {
        DimBuilder builder(cfg, sig, rng);
        if (auto node = builder.build(target, depth_budget)) return node;
    }
    return nullptr;
}

ExpressionTree random_dim_tree(const Config& cfg, const DimSignature& sig, Dim target,
                               Rng& rng, int depth_budget) {
    if (depth_budget < 1) throw DimConstructionError("depth budget must be >= 1");
    if (auto node = random_dim_subtree(cfg, sig, target, rng, depth_budget))
        return ExpressionTree(std::move(node));
    throw DimConstructionError("cannot construct a dimension-" + std::to_string(target) +
                               " expression with the given signature and depth budget");
}

Node* dim_preserving_pick(ExpressionTree& tree, Dim required, const DimSignature& sig,
                          Rng& rng, double internal_bias) {
    auto dims = annotate_dimensions(tree, sig);
    if (dims.empty()) return nullptr;

    std::vector<Node*> internal, terminal;
    std::vector<Node*> all;
    collect_nodes(*tree.root(), all);
    for (Node* n : all) {
        auto it = dims.find(n);  // dormant subtrees are not annotated
        if (it == dims.end() || it->second != required) continue;
        (n->is_terminal() ? terminal : internal).push_back(n);
    }
    if (internal.empty() && terminal.empty()) return nullptr;

    bool want_internal = rng.bernoulli(internal_bias);
    const auto& pool = want_internal ? (internal.empty() ? terminal : internal)
                                     : (terminal.empty() ? internal : terminal);
    return pool[rng.index(pool.size())];
}

}  // namespace sr
