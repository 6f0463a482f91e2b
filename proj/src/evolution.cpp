#include "sr/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace sr {

namespace {

constexpr double kUnset = std::numeric_limits<double>::infinity();

// fitness, then compactness, then draw order
bool better(const Individual& a, int ia, const Individual& b, int ib) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    int na = a.tree.node_count(), nb = b.tree.node_count();
    if (na != nb) return na < nb;
    return ia < ib;
}

// Exponent subtrees of pow nodes with dimensionful bases must stay
// literal integers; genetic operations leave them alone.
bool pow_exponent_protected(const Node& node,
                            const std::unordered_map<const Node*, Dim>& dims) {
    if (!node.is_binary() || std::get<BinaryOp>(node.kind) != BinaryOp::Pow || !node.left)
        return false;
    auto it = dims.find(node.left.get());
    return it != dims.end() && it->second != 0;
}

std::unordered_set<const Node*> protected_nodes(
    const Node& root, const std::unordered_map<const Node*, Dim>& dims) {
    std::unordered_set<const Node*> out;
    std::vector<const Node*> all;
    collect_nodes(root, all);
    for (const Node* n : all) {
        if (pow_exponent_protected(*n, dims) && n->right) {
            std::vector<const Node*> sub;
            collect_nodes(*n->right, sub);
            out.insert(sub.begin(), sub.end());
        }
    }
    return out;
}

std::vector<std::size_t> draw_pool(std::size_t n_pop, int n_tourn, Rng& rng) {
    // partial Fisher-Yates: first n_tourn entries are a uniform sample
    // without replacement
    std::vector<std::size_t> idx(n_pop);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < n_tourn; ++i) {
        std::size_t j = i + rng.index(n_pop - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n_tourn);
    return idx;
}

}  // namespace

Population initialize(const Config& cfg, Rng& rng) {
    cfg.validate();
    Population pop;
    pop.individuals.reserve(cfg.n_pop);
    for (int i = 0; i < cfg.n_pop; ++i) {
        Individual ind;
        if (cfg.dcsr)
            ind.tree = random_dim_tree(cfg, *cfg.dim_signature, cfg.dim_signature->target,
                                       rng, cfg.m_depth);
        else
            ind.tree = random_tree(cfg, rng, cfg.fill_to_max);
        ind.fitness = kUnset;
        pop.individuals.push_back(std::move(ind));
    }
    return pop;
}

const Individual* tournament_one(const Population& pop, const Config& cfg, Rng& rng) {
    auto pool = draw_pool(pop.individuals.size(), cfg.n_tourn, rng);
    const Individual* best = nullptr;
    int best_order = 0;
    for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
        const Individual& cand = pop.individuals[pool[i]];
        if (!best || better(cand, i, *best, best_order)) {
            best = &cand;
            best_order = i;
        }
    }
    return best;
}

std::pair<const Individual*, const Individual*> tournament(const Population& pop,
                                                           const Config& cfg, Rng& rng) {
    if (cfg.b_doublet) {
        const Individual* a = tournament_one(pop, cfg, rng);
        const Individual* b = tournament_one(pop, cfg, rng);
        return {a, b};
    }
    auto pool = draw_pool(pop.individuals.size(), cfg.n_tourn, rng);
    int first = -1, second = -1;
    for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
        const Individual& cand = pop.individuals[pool[i]];
        if (first < 0 || better(cand, i, pop.individuals[pool[first]], first)) {
            second = first;
            first = i;
        } else if (second < 0 || better(cand, i, pop.individuals[pool[second]], second)) {
            second = i;
        }
    }
    return {&pop.individuals[pool[first]], &pop.individuals[pool[second]]};
}

void crossover_swap(Node* a, Node* b) {
    std::swap(*a, *b);
}

ExpressionTree crossover(const Individual& a, const Individual& b, const Config& cfg, Rng& rng) {
    const DimSignature* sig = cfg.dcsr ? &*cfg.dim_signature : nullptr;

    for (int attempt = 0; attempt < cfg.xover_retries; ++attempt) {
        ExpressionTree child_a = a.tree;
        ExpressionTree child_b = b.tree;
        Node* loc_a = pick_node(child_a, rng, cfg.internal_bias);

        bool a_only = false;
        Node* loc_b = nullptr;
        if (sig) {
            auto dims = annotate_dimensions(child_a, *sig);
            if (protected_nodes(*child_a.root(), dims).contains(loc_a)) continue;
            auto it = dims.find(loc_a);
            if (it == dims.end()) {
                // A-pick sits in a dormant region: only childA stays
                // dimensionally valid after an unconstrained swap
                loc_b = pick_node(child_b, rng, cfg.internal_bias);
                a_only = true;
            } else {
                loc_b = dim_preserving_pick(child_b, it->second, *sig, rng, cfg.internal_bias);
                if (!loc_b) continue;  // no same-dimension subtree in B
                auto dims_b = annotate_dimensions(child_b, *sig);
                if (protected_nodes(*child_b.root(), dims_b).contains(loc_b)) continue;
            }
        } else {
            loc_b = pick_node(child_b, rng, cfg.internal_bias);
        }

        crossover_swap(loc_a, loc_b);
        ExpressionTree& chosen =
            (a_only || !rng.bernoulli(0.5)) ? child_a : child_b;
        if (chosen.depth() <= cfg.m_depth) return std::move(chosen);
    }

    if (sig) return mutate(a.tree, cfg, rng);
    return a.tree;  // depth-violating swaps exhausted: keep parent A
}

namespace {

struct Mutator {
    const Config& cfg;
    Rng& rng;
    const DimSignature* sig;
    const std::unordered_map<const Node*, Dim>* dims;

    NodePtr fresh_terminal(const Node& node, bool in_dormant) {
        if (sig && !in_dormant && dims) {
            auto it = dims->find(&node);
            if (it != dims->end()) {
                Dim d = it->second;
                if (auto t = random_dim_subtree(cfg, *sig, d, rng, 1)) return t;
                return clone(node);  // no terminal of this dimension exists
            }
        }
        return random_terminal(cfg, rng);
    }

    NodePtr replacement(const Node& node, int budget, bool in_dormant) {
        if (sig && !in_dormant && dims) {
            auto it = dims->find(&node);
            if (it != dims->end()) {
                if (auto t = random_dim_subtree(cfg, *sig, it->second, rng, budget)) return t;
                return clone(node);
            }
        }
        return random_subtree(cfg, rng, budget, false);
    }

    NodePtr drop(const Node& node, int depth, bool in_dormant) {
        if (node.is_terminal()) return fresh_terminal(node, in_dormant);
        if (sig && !in_dormant && dims) {
            // keep dimension: only children of equal dimension may take
            // the node's place
            auto it = dims->find(&node);
            if (it != dims->end()) {
                std::vector<const Node*> same;
                if (node.left) {
                    auto cl = dims->find(node.left.get());
                    if (cl != dims->end() && cl->second == it->second) same.push_back(node.left.get());
                }
                if (node.is_binary() && node.right) {
                    auto cr = dims->find(node.right.get());
                    if (cr != dims->end() && cr->second == it->second) same.push_back(node.right.get());
                }
                if (same.empty()) return replacement(node, cfg.m_depth - depth + 1, in_dormant);
                return clone(*same[rng.index(same.size())]);
            }
        }
        std::vector<const Node*> children;
        if (node.left) children.push_back(node.left.get());
        if (node.right) children.push_back(node.right.get());
        return clone(*children[rng.index(children.size())]);
    }

    NodePtr walk(const Node& node, int depth, bool in_dormant) {
        if (rng.bernoulli(cfg.p_mut)) {
            if (rng.bernoulli(cfg.p_drop)) return drop(node, depth, in_dormant);
            return replacement(node, cfg.m_depth - depth + 1, in_dormant);
        }
        auto out = std::make_unique<Node>();
        out->kind = node.kind;
        if (node.left) out->left = walk(*node.left, depth + 1, in_dormant);
        if (node.right) {
            bool prot = sig && !in_dormant && dims && pow_exponent_protected(node, *dims);
            out->right = prot ? clone(*node.right)
                              : walk(*node.right, depth + 1, in_dormant || node.is_unary());
        }
        return out;
    }
};

}  // namespace

ExpressionTree mutate(const ExpressionTree& tree, const Config& cfg, Rng& rng) {
    if (tree.empty()) return tree;
    std::unordered_map<const Node*, Dim> dims;
    const DimSignature* sig = cfg.dcsr ? &*cfg.dim_signature : nullptr;
    if (sig) dims = annotate_dimensions(tree, *sig);
    Mutator m{cfg, rng, sig, sig ? &dims : nullptr};
    return ExpressionTree(m.walk(*tree.root(), 1, false));
}

void evaluate_population(Population& pop, const Dataset& ds,
                         std::span<const std::size_t> rows, const FitnessSpec& spec) {
    for (auto& ind : pop.individuals) ind.fitness = score(ind.tree, ds, rows, spec);
}

Population breed(const Population& pop, const Config& cfg, Rng& rng) {
    const int n_pop = cfg.n_pop;
    Population next;
    next.generation = pop.generation + 1;
    next.individuals.reserve(n_pop);

    // elites, verbatim
    std::vector<int> order(pop.individuals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return better(pop.individuals[i], i, pop.individuals[j], j);
    });
    for (int i = 0; i < cfg.n_copy; ++i)
        next.individuals.push_back(pop.individuals[order[i]]);

    int n_children = static_cast<int>(std::lround(n_pop * cfg.p_xover));
    n_children = std::min(n_children, n_pop - cfg.n_copy);
    for (int i = 0; i < n_children; ++i) {
        auto [pa, pb] = tournament(pop, cfg, rng);
        next.individuals.push_back({crossover(*pa, *pb, cfg, rng), kUnset});
    }

    while (static_cast<int>(next.individuals.size()) < n_pop) {
        const Individual* survivor = tournament_one(pop, cfg, rng);
        next.individuals.push_back({mutate(survivor->tree, cfg, rng), kUnset});
    }
    return next;
}

Population step_generation(Population& pop, const Dataset& ds, const Config& cfg,
                           const FitnessSpec& spec, Rng& rng) {
    auto split = make_split(ds.n_rows(), rng);
    evaluate_population(pop, ds, split.testing, spec);
    return breed(pop, cfg, rng);
}

RunReport run(const Config& cfg, const Dataset& ds, const FitnessSpec& spec) {
    Config effective = cfg;
    if (effective.n_var == 0) effective.n_var = static_cast<int>(ds.n_cols());
    if (effective.dcsr && !effective.dim_signature) effective.dim_signature = ds.signature();
    effective.validate();
    check_targets_for_metric(ds, spec.metric);
    if (static_cast<int>(ds.n_cols()) != effective.n_var)
        throw ConfigError("n_var does not match dataset column count");

    auto t0 = std::chrono::steady_clock::now();
    Rng rng(effective.seed);
    RunReport report;
    report.seed = effective.seed;
    report.config = effective;

    Population pop = initialize(effective, rng);
    ExpressionTree champion;
    double champion_full = kUnset;

    for (int g = 0; g <= effective.n_gen; ++g) {
        auto split = make_split(ds.n_rows(), rng);
        evaluate_population(pop, ds, split.testing, spec);

        int best = 0;
        for (int i = 1; i < static_cast<int>(pop.individuals.size()); ++i)
            if (better(pop.individuals[i], i, pop.individuals[best], best)) best = i;

        double full = score(pop.individuals[best].tree, ds, spec);
        if (full < champion_full) {
            champion = pop.individuals[best].tree;
            champion_full = full;
        }
        report.records.push_back({g, pop.individuals[best].fitness, champion_full,
                                  serialize(champion), champion.node_count()});

        if (g < effective.n_gen) pop = breed(pop, effective, rng);
    }

    report.best = std::move(champion);
    report.best_fitness = champion_full;
    report.duration_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace sr
