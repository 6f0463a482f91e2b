#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sr/dataset.hpp"
#include "sr/expr.hpp"
#include "sr/rng.hpp"

namespace sr {

enum class Metric { MAE, FracMAE, RMS, FracRMS };

Metric metric_from_name(const std::string& name);
std::string metric_name(Metric m);

struct FitnessSpec {
    Metric metric = Metric::MAE;
    double parsimony_coeff = 1e-4;       // per node, dormant nodes included
    double invalid_sentinel = 1e30;      // finite, dominates any real metric here
};

// Expression flattened to a postfix tape; the fitness hot path. Dormant
// subtrees are dropped at compile time. Evaluation reports invalid
// results as NaN.
class CompiledExpr {
public:
    explicit CompiledExpr(const ExpressionTree& tree);

    double eval(std::span<const double> row) const;

private:
    struct Instr {
        enum Code : std::uint8_t {
            PushVar, PushConst,
            Add, Sub, Mul, Div, Pow,
            Neg, Sqrt, Log, Sin, Cos, Exp, Step
        };
        Code code;
        int var = 0;
        double value = 0.0;
    };
    std::vector<Instr> code_;
    int max_stack_ = 0;

    void compile(const Node& node, int depth);
};

// Metric over all rows plus the parsimony term. Any invalid row pushes
// the score to invalid_sentinel + parsimony. Fixed row order keeps the
// result deterministic.
double score(const ExpressionTree& tree, const Dataset& ds,
             std::span<const std::size_t> rows, const FitnessSpec& spec);
double score(const ExpressionTree& tree, const Dataset& ds, const FitnessSpec& spec);

// Fractional metrics are undefined on zero targets; call before a run.
void check_targets_for_metric(const Dataset& ds, Metric m);

struct SplitPlan {
    std::vector<std::size_t> training;
    std::vector<std::size_t> testing;
};

// Uniformly random half/half partition, refreshed every generation.
SplitPlan make_split(std::size_t n_rows, Rng& rng);

}  // namespace sr
