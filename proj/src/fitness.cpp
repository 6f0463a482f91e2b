#include "sr/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sr {

Metric metric_from_name(const std::string& name) {
    if (name == "mae") return Metric::MAE;
    if (name == "frac_mae") return Metric::FracMAE;
    if (name == "rms") return Metric::RMS;
    if (name == "frac_rms") return Metric::FracRMS;
    throw std::invalid_argument("unknown metric '" + name + "'");
}

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::MAE: return "mae";
        case Metric::FracMAE: return "frac_mae";
        case Metric::RMS: return "rms";
        case Metric::FracRMS: return "frac_rms";
    }
    return "?";
}

CompiledExpr::CompiledExpr(const ExpressionTree& tree) {
    if (!tree.empty()) compile(*tree.root(), 1);
}

void CompiledExpr::compile(const Node& node, int depth) {
    max_stack_ = std::max(max_stack_, depth);
    if (const auto* v = std::get_if<Variable>(&node.kind)) {
        code_.push_back({Instr::PushVar, v->index, 0.0});
        return;
    }
    if (const auto* c = std::get_if<Constant>(&node.kind)) {
        code_.push_back({Instr::PushConst, 0, c->value});
        return;
    }
    if (const auto* f = std::get_if<UnaryFn>(&node.kind)) {
        compile(*node.left, depth);  // dormant right child is dropped
        Instr::Code op;
        switch (*f) {
            case UnaryFn::Neg: op = Instr::Neg; break;
            case UnaryFn::Sqrt: op = Instr::Sqrt; break;
            case UnaryFn::Log: op = Instr::Log; break;
            case UnaryFn::Sin: op = Instr::Sin; break;
            case UnaryFn::Cos: op = Instr::Cos; break;
            case UnaryFn::Exp: op = Instr::Exp; break;
            case UnaryFn::UnitStep: op = Instr::Step; break;
        }
        code_.push_back({op, 0, 0.0});
        return;
    }
    compile(*node.left, depth);
    compile(*node.right, depth + 1);
    Instr::Code op;
    switch (std::get<BinaryOp>(node.kind)) {
        case BinaryOp::Add: op = Instr::Add; break;
        case BinaryOp::Sub: op = Instr::Sub; break;
        case BinaryOp::Mul: op = Instr::Mul; break;
        case BinaryOp::Div: op = Instr::Div; break;
        case BinaryOp::Pow: op = Instr::Pow; break;
    }
    code_.push_back({op, 0, 0.0});
}

double CompiledExpr::eval(std::span<const double> row) const {
    constexpr int kInlineStack = 64;
    double stack[kInlineStack];
    std::vector<double> heap;
    double* sp = stack;
    if (max_stack_ > kInlineStack) {
        heap.resize(max_stack_);
        sp = heap.data();
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();

    int top = 0;
    for (const Instr& ins : code_) {
        switch (ins.code) {
            case Instr::PushVar: sp[top++] = row[ins.var]; break;
            case Instr::PushConst: sp[top++] = ins.value; break;
            case Instr::Add: --top; sp[top - 1] += sp[top]; break;
            case Instr::Sub: --top; sp[top - 1] -= sp[top]; break;
            case Instr::Mul: --top; sp[top - 1] *= sp[top]; break;
            case Instr::Div:
                --top;
                sp[top - 1] = (sp[top] == 0.0) ? nan : sp[top - 1] / sp[top];
                break;
            case Instr::Pow: --top; sp[top - 1] = std::pow(sp[top - 1], sp[top]); break;
            case Instr::Neg: sp[top - 1] = -sp[top - 1]; break;
            case Instr::Sqrt: sp[top - 1] = std::sqrt(sp[top - 1]); break;
            case Instr::Log: sp[top - 1] = std::log(sp[top - 1]); break;
            case Instr::Sin: sp[top - 1] = std::sin(sp[top - 1]); break;
            case Instr::Cos: sp[top - 1] = std::cos(sp[top - 1]); break;
            case Instr::Exp: sp[top - 1] = std::exp(sp[top - 1]); break;
            case Instr::Step:
                sp[top - 1] = std::isnan(sp[top - 1]) ? nan : (sp[top - 1] >= 0.0 ? 1.0 : 0.0);
                break;
        }
        if (!std::isfinite(sp[top - 1])) return nan;
    }
    return top == 1 ? sp[0] : nan;
}

namespace {

double finish(Metric m, double acc, std::size_t n) {
    double mean = acc / static_cast<double>(n);
    return (m == Metric::RMS || m == Metric::FracRMS) ? std::sqrt(mean) : mean;
}

}  // namespace

double score(const ExpressionTree& tree, const Dataset& ds,
             std::span<const std::size_t> rows, const FitnessSpec& spec) {
    const double parsimony = spec.parsimony_coeff * tree.node_count();
    if (rows.empty()) return spec.invalid_sentinel + parsimony;

    CompiledExpr prog(tree);
    double acc = 0.0;
    for (std::size_t i : rows) {
        double pred = prog.eval(ds.row(i));
        if (std::isnan(pred)) return spec.invalid_sentinel + parsimony;
        double t = ds.targets[i];
        double r = pred - t;
        switch (spec.metric) {
            case Metric::MAE: acc += std::fabs(r); break;
            case Metric::FracMAE: acc += std::fabs(r) / std::fabs(t); break;
            case Metric::RMS: acc += r * r; break;
            case Metric::FracRMS: acc += (r / t) * (r / t); break;
        }
    }
    return finish(spec.metric, acc, rows.size()) + parsimony;
}

double score(const ExpressionTree& tree, const Dataset& ds, const FitnessSpec& spec) {
    std::vector<std::size_t> all(ds.n_rows());
    std::iota(all.begin(), all.end(), 0);
    return score(tree, ds, all, spec);
}

void check_targets_for_metric(const Dataset& ds, Metric m) {
    if (m != Metric::FracMAE && m != Metric::FracRMS) return;
    for (std::size_t i = 0; i < ds.targets.size(); ++i)
        if (ds.targets[i] == 0.0)
            throw DatasetError("fractional metric undefined: target is 0 at row " +
                               std::to_string(i + 1));
}

SplitPlan make_split(std::size_t n_rows, Rng& rng) {
    if (n_rows < 2) throw std::invalid_argument("make_split needs at least 2 rows");
    std::vector<std::size_t> idx(n_rows);
    std::iota(idx.begin(), idx.end(), 0);
    // Fisher-Yates with the run RNG, then cut in half.
    for (std::size_t i = n_rows - 1; i > 0; --i) {
        std::size_t j = rng.index(i + 1);
        std::swap(idx[i], idx[j]);
    }
    std::size_t half = n_rows / 2;
    SplitPlan plan;
    plan.training.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(half));
    plan.testing.assign(idx.begin() + static_cast<std::ptrdiff_t>(half), idx.end());
    return plan;
}

}  // namespace sr
