#include "sr/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace sr {

NodePtr make_var(int index) {
    return std::make_unique<Node>(Node{Variable{index}, nullptr, nullptr});
}

NodePtr make_const(double value) {
    return std::make_unique<Node>(Node{Constant{value}, nullptr, nullptr});
}

NodePtr make_unary(UnaryFn fn, NodePtr arg, NodePtr dormant) {
    return std::make_unique<Node>(Node{fn, std::move(arg), std::move(dormant)});
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
    return std::make_unique<Node>(Node{op, std::move(lhs), std::move(rhs)});
}

NodePtr clone(const Node& node) {
    auto out = std::make_unique<Node>();
    out->kind = node.kind;
    if (node.left) out->left = clone(*node.left);
    if (node.right) out->right = clone(*node.right);
    return out;
}

int subtree_depth(const Node& node) {
    int d = 0;
    if (node.left) d = subtree_depth(*node.left);
    if (node.right) d = std::max(d, subtree_depth(*node.right));
    return d + 1;
}

int subtree_size(const Node& node) {
    int n = 1;
    if (node.left) n += subtree_size(*node.left);
    if (node.right) n += subtree_size(*node.right);
    return n;
}

bool structurally_equal(const Node* a, const Node* b) {
    if (a == nullptr || b == nullptr) return a == b;
    if (a->kind != b->kind) return false;
    return structurally_equal(a->left.get(), b->left.get()) &&
           structurally_equal(a->right.get(), b->right.get());
}

ExpressionTree::ExpressionTree(const ExpressionTree& other)
    : root_(other.root_ ? clone(*other.root_) : nullptr) {}

ExpressionTree& ExpressionTree::operator=(const ExpressionTree& other) {
    if (this != &other) root_ = other.root_ ? clone(*other.root_) : nullptr;
    return *this;
}

int ExpressionTree::depth() const { return root_ ? subtree_depth(*root_) : 0; }
int ExpressionTree::node_count() const { return root_ ? subtree_size(*root_) : 0; }

bool operator==(const ExpressionTree& a, const ExpressionTree& b) {
    return structurally_equal(a.root(), b.root());
}

// --- evaluation -----------------------------------------------------------

std::optional<double> evaluate_node(const Node& node, std::span<const double> row) {
    if (const auto* v = std::get_if<Variable>(&node.kind)) {
        if (static_cast<std::size_t>(v->index) >= row.size()) return std::nullopt;
        return row[v->index];
    }
    if (const auto* c = std::get_if<Constant>(&node.kind)) return c->value;

    if (const auto* f = std::get_if<UnaryFn>(&node.kind)) {
        auto a = evaluate_node(*node.left, row);  // dormant right child skipped
        if (!a) return std::nullopt;
        double x = *a, y;
        switch (*f) {
            case UnaryFn::Neg: y = -x; break;
            case UnaryFn::Sqrt: y = std::sqrt(x); break;
            case UnaryFn::Log: y = std::log(x); break;
            case UnaryFn::Sin: y = std::sin(x); break;
            case UnaryFn::Cos: y = std::cos(x); break;
            case UnaryFn::Exp: y = std::exp(x); break;
            case UnaryFn::UnitStep: y = (x >= 0.0) ? 1.0 : 0.0; break;
        }
        if (!std::isfinite(y)) return std::nullopt;
        return y;
    }

    auto op = std::get<BinaryOp>(node.kind);
    auto a = evaluate_node(*node.left, row);
    if (!a) return std::nullopt;
    auto b = evaluate_node(*node.right, row);
    if (!b) return std::nullopt;
    double y;
    switch (op) {
        case BinaryOp::Add: y = *a + *b; break;
        case BinaryOp::Sub: y = *a - *b; break;
        case BinaryOp::Mul: y = *a * *b; break;
        case BinaryOp::Div: y = (*b == 0.0) ? std::numeric_limits<double>::quiet_NaN()
                                            : *a / *b; break;
        case BinaryOp::Pow: y = std::pow(*a, *b); break;
    }
    if (!std::isfinite(y)) return std::nullopt;
    return y;
}

std::optional<double> evaluate(const ExpressionTree& tree, const EvalContext& ctx) {
    if (tree.empty()) return std::nullopt;
    return evaluate_node(*tree.root(), ctx.row);
}

// --- textual form ---------------------------------------------------------

namespace {

const char* unary_name(UnaryFn f) {
    switch (f) {
        case UnaryFn::Neg: return "neg";
        case UnaryFn::Sqrt: return "sqrt";
        case UnaryFn::Log: return "log";
        case UnaryFn::Sin: return "sin";
        case UnaryFn::Cos: return "cos";
        case UnaryFn::Exp: return "exp";
        case UnaryFn::UnitStep: return "step";
    }
    return "?";
}

const char* binary_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
    }
    return "?";
}

std::string format_constant(double v) {
    // shortest representation that parses back bit-exactly
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void serialize_into(const Node& node, std::string& out) {
    if (const auto* v = std::get_if<Variable>(&node.kind)) {
        out += "v" + std::to_string(v->index + 1);
        return;
    }
    if (const auto* c = std::get_if<Constant>(&node.kind)) {
        out += format_constant(c->value);
        return;
    }
    if (const auto* f = std::get_if<UnaryFn>(&node.kind)) {
        out += unary_name(*f);
        out += '(';
        serialize_into(*node.left, out);
        if (node.right) {
            out += " [dormant: ";
            serialize_into(*node.right, out);
            out += ']';
        }
        out += ')';
        return;
    }
    out += '(';
    serialize_into(*node.left, out);
    out += ' ';
    out += binary_symbol(std::get<BinaryOp>(node.kind));
    out += ' ';
    serialize_into(*node.right, out);
    out += ')';
}

}  // namespace

std::string serialize_node(const Node& node) {
    std::string out;
    serialize_into(node, out);
    return out;
}

std::string serialize(const ExpressionTree& tree) {
    return tree.empty() ? std::string() : serialize_node(*tree.root());
}

ParseError::ParseError(std::size_t pos, const std::string& reason)
    : std::runtime_error("parse error at position " + std::to_string(pos) + ": " + reason),
      position(pos) {}

namespace {

class Parser {
public:
    Parser(const std::string& text, std::span<const std::string> columns)
        : text_(text), columns_(columns) {}

    NodePtr run() {
        auto node = expression();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return node;
    }

private:
    const std::string& text_;
    std::span<const std::string> columns_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) { throw ParseError(pos_, why); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        return text_[pos_];
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    bool consume(char c) {
        if (!at_end() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string identifier() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected identifier");
        return text_.substr(start, pos_ - start);
    }

    NodePtr expression() {
        char c = peek();
        if (c == '(') return binary();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+')
            return number();
        return name();
    }

    NodePtr binary() {
        expect('(');
        auto lhs = expression();
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        BinaryOp op;
        switch (text_[pos_]) {
            case '+': op = BinaryOp::Add; break;
            case '-': op = BinaryOp::Sub; break;
            case '*': op = BinaryOp::Mul; break;
            case '/': op = BinaryOp::Div; break;
            case '^': op = BinaryOp::Pow; break;
            default: fail("expected binary operator");
        }
        ++pos_;
        auto rhs = expression();
        expect(')');
        return make_binary(op, std::move(lhs), std::move(rhs));
    }

    NodePtr number() {
        skip_ws();
        std::size_t start = pos_;
        const char* begin = text_.c_str() + start;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("expected number");
        pos_ = start + static_cast<std::size_t>(end - begin);
        if (!std::isfinite(v)) fail("non-finite constant");
        return make_const(v);
    }

    NodePtr name() {
        std::size_t start = pos_;
        std::string id = identifier();

        static const std::pair<const char*, UnaryFn> fns[] = {
            {"neg", UnaryFn::Neg}, {"sqrt", UnaryFn::Sqrt}, {"log", UnaryFn::Log},
            {"sin", UnaryFn::Sin}, {"cos", UnaryFn::Cos},   {"exp", UnaryFn::Exp},
            {"step", UnaryFn::UnitStep}};
        for (auto [fname, fn] : fns) {
            if (id == fname && !at_end() && text_[pos_] == '(') {
                expect('(');
                auto arg = expression();
                NodePtr dormant;
                skip_ws();
                if (consume('[')) {
                    std::string tag = identifier();
                    if (tag != "dormant") fail("expected 'dormant' annotation");
                    expect(':');
                    dormant = expression();
                    expect(']');
                }
                expect(')');
                return make_unary(fn, std::move(arg), std::move(dormant));
            }
        }

        if (id.size() >= 2 && id[0] == 'v') {
            bool digits = true;
            for (std::size_t i = 1; i < id.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(id[i]))) digits = false;
            if (digits) {
                int k = std::stoi(id.substr(1));
                if (k < 1) {
                    pos_ = start;
                    fail("variable index must be >= 1");
                }
                return make_var(k - 1);
            }
        }

        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i] == id) return make_var(static_cast<int>(i));

        pos_ = start;
        fail("unknown identifier '" + id + "'");
    }
};

}  // namespace

ExpressionTree parse(const std::string& text, std::span<const std::string> columns) {
    return ExpressionTree(Parser(text, columns).run());
}

// --- random construction --------------------------------------------------

NodePtr random_terminal(const Config& cfg, Rng& rng) {
    if (rng.bernoulli(cfg.p_const) || cfg.n_var == 0)
        return make_const(rng.uniform(cfg.constant_min, cfg.constant_max));
    return make_var(static_cast<int>(rng.index(cfg.n_var)));
}

namespace {

// Draws a non-terminal kind according to the op-prob table; the caller
// has already decided against a terminal.
NodeKind draw_op(const OpProbs& p, Rng& rng) {
    const std::pair<double, NodeKind> table[] = {
        {p.add, BinaryOp::Add},   {p.sub, BinaryOp::Sub},  {p.mul, BinaryOp::Mul},
        {p.div, BinaryOp::Div},   {p.pow, BinaryOp::Pow},  {p.neg, UnaryFn::Neg},
        {p.sqrt, UnaryFn::Sqrt},  {p.log, UnaryFn::Log},   {p.sin, UnaryFn::Sin},
        {p.cos, UnaryFn::Cos},    {p.exp, UnaryFn::Exp},   {p.step, UnaryFn::UnitStep}};
    double total = 0.0;
    for (auto& [w, k] : table) total += w;
    double r = rng.uniform(0.0, total);
    for (auto& [w, k] : table) {
        if (r < w) return k;
        r -= w;
    }
    return table[std::size(table) - 1].second;
}

}  // namespace

NodePtr random_subtree(const Config& cfg, Rng& rng, int depth_budget, bool fill_to_max) {
    if (depth_budget <= 1) return random_terminal(cfg, rng);

    double term_p = cfg.op_probs.terminal();
    bool pick_terminal = fill_to_max ? false : rng.bernoulli(term_p);
    if (pick_terminal) return random_terminal(cfg, rng);

    NodeKind kind = draw_op(cfg.op_probs, rng);
    if (std::holds_alternative<BinaryOp>(kind)) {
        auto lhs = random_subtree(cfg, rng, depth_budget - 1, fill_to_max);
        auto rhs = random_subtree(cfg, rng, depth_budget - 1, fill_to_max);
        return make_binary(std::get<BinaryOp>(kind), std::move(lhs), std::move(rhs));
    }
    auto arg = random_subtree(cfg, rng, depth_budget - 1, fill_to_max);
    NodePtr dormant;
    if (cfg.dormant && rng.bernoulli(cfg.p_dormant))
        dormant = random_subtree(cfg, rng, depth_budget - 1, false);
    return make_unary(std::get<UnaryFn>(kind), std::move(arg), std::move(dormant));
}

ExpressionTree random_tree(const Config& cfg, Rng& rng, bool fill_to_max) {
    if (cfg.op_probs.terminal() <= 0.0 && !fill_to_max)
        throw ConfigError("terminal probability is 0; tree generation would not terminate");
    if (cfg.m_depth < 1) throw ConfigError("m_depth must be >= 1");
    return ExpressionTree(random_subtree(cfg, rng, cfg.m_depth, fill_to_max));
}

// --- node picking ---------------------------------------------------------

void collect_nodes(Node& node, std::vector<Node*>& out) {
    out.push_back(&node);
    if (node.left) collect_nodes(*node.left, out);
    if (node.right) collect_nodes(*node.right, out);
}

void collect_nodes(const Node& node, std::vector<const Node*>& out) {
    out.push_back(&node);
    if (node.left) collect_nodes(*node.left, out);
    if (node.right) collect_nodes(*node.right, out);
}

Node* pick_node(ExpressionTree& tree, Rng& rng, double internal_bias) {
    std::vector<Node*> all;
    collect_nodes(*tree.root(), all);
    std::vector<Node*> internal, terminal;
    for (Node* n : all) (n->is_terminal() ? terminal : internal).push_back(n);

    bool want_internal = rng.bernoulli(internal_bias);
    const auto& pool = want_internal ? (internal.empty() ? terminal : internal)
                                     : (terminal.empty() ? internal : terminal);
    return pool[rng.index(pool.size())];
}

}  // namespace sr
