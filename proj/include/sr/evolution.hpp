#pragma once

#include <string>
#include <vector>

#include "sr/dataset.hpp"
#include "sr/dimension.hpp"
#include "sr/expr.hpp"
#include "sr/fitness.hpp"

namespace sr {

struct Individual {
    ExpressionTree tree;
    double fitness = 0.0;  // split fitness of the current generation, lower is better
};

struct Population {
    std::vector<Individual> individuals;
    int generation = 0;
};

struct GenRecord {
    int generation = 0;
    double split_fitness = 0.0;   // best testing-half fitness this generation
    double elite_fitness = 0.0;   // running-best full-dataset fitness
    std::string elite_expr;
    int elite_nodes = 0;
};

struct RunReport {
    std::uint64_t seed = 0;
    Config config;
    std::vector<GenRecord> records;  // n_gen + 1 entries, generation 0 included
    ExpressionTree best;             // champion on the full dataset
    double best_fitness = 0.0;
    double duration_sec = 0.0;
};

Population initialize(const Config& cfg, Rng& rng);

// Parent pair by tournament. Single mode draws one pool of n_tourn
// without replacement and returns its best two; double mode returns the
// winner of two independent pools. Ties break by node count, then draw
// order.
std::pair<const Individual*, const Individual*> tournament(const Population& pop,
                                                           const Config& cfg, Rng& rng);

// Best of one tournament pool; the asexual-reproduction survivor pick.
const Individual* tournament_one(const Population& pop, const Config& cfg, Rng& rng);

// Swaps the subtrees at the two locators in place.
void crossover_swap(Node* a, Node* b);

// Subtree exchange returning one offspring chosen uniformly. Depth
// violations retry, then fall back to a copy of parentA. In DCSR mode
// the B-side pick must match the A-subtree's dimension; if no match is
// found after bounded retries the child is a mutation of parentA.
ExpressionTree crossover(const Individual& a, const Individual& b, const Config& cfg, Rng& rng);

// Per-node mutation: each node hit with probability p_mut is dropped
// (replaced by one of its children, or a fresh terminal if it has none)
// with probability p_drop, otherwise replaced by a fresh random
// expression within the remaining depth budget. DCSR replacements are
// built at the node's inferred dimension.
ExpressionTree mutate(const ExpressionTree& tree, const Config& cfg, Rng& rng);

// Scores every individual on the given rows.
void evaluate_population(Population& pop, const Dataset& ds,
                         std::span<const std::size_t> rows, const FitnessSpec& spec);

// Next population from an evaluated one: n_copy verbatim elites,
// n_pop * p_xover crossover children, remainder mutated tournament
// survivors. Size stays n_pop.
Population breed(const Population& pop, const Config& cfg, Rng& rng);

// One generation: resplit, evaluate on the testing half (fitness is
// written back into `pop`), then breed the next population.
Population step_generation(Population& pop, const Dataset& ds, const Config& cfg,
                           const FitnessSpec& spec, Rng& rng);

RunReport run(const Config& cfg, const Dataset& ds, const FitnessSpec& spec);

}  // namespace sr
