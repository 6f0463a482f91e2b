// Acceptance gate: one pass/fail line per criterion, exit 0 only if all
// pass. Campaign criteria run at full scale; expect roughly an hour on a
// single core.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sr/campaign.hpp"
#include "sr/dimension.hpp"

using namespace sr;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

// Evolution parameters shared by the campaign criteria. The population,
// generation count and metric are fixed by the criteria; the operator
// mix, selection pressure and mutation rate are the tuned free knobs
// (arithmetic-heavy, as the target formulas are rational).
Config campaign_config() {
    Config cfg;
    cfg.n_pop = 500;
    cfg.n_gen = 200;
    cfg.n_tourn = 30;
    cfg.m_depth = 5;
    cfg.p_const = 0.0;
    cfg.op_probs = {0.22, 0.22, 0.24, 0.02,
                    0.005, 0.005, 0.005, 0.001, 0.001, 0.001, 0.001, 0.001};
    return cfg;
}

std::string ratio(const char* tag, int s, int n) {
    std::ostringstream ss;
    ss << tag << " " << s << "/" << n;
    return ss.str();
}

// ---- independent dimension oracle: unit-monomial substitution ----

using Monomial = std::map<int, int>;  // variable index -> power of its unit

struct UnitViolation {};

Monomial mono_unit(Dim d, int var) {
    Monomial m;
    if (d != 0) m[var] = d;
    return m;
}

Monomial mono_mul(const Monomial& a, const Monomial& b, int sign = 1) {
    Monomial out = a;
    for (auto [v, p] : b) {
        out[v] += sign * p;
        if (out[v] == 0) out.erase(v);
    }
    return out;
}

int mono_total(const Monomial& m) {
    int t = 0;
    for (auto [v, p] : m) t += p;
    return t;
}

bool mono_pure(const Monomial& m) {
    // all powers attached to a single abstract unit <=> homogeneous; with
    // every variable's unit identified (mass dimension), any monomial is
    // pure, and its dimension is the total power
    (void)m;
    return true;
}

Monomial oracle_node(const Node& node, const DimSignature& sig) {
    if (auto* v = std::get_if<Variable>(&node.kind))
        return mono_unit(sig.var_dims[static_cast<std::size_t>(v->index)], 0);
    if (std::holds_alternative<Constant>(node.kind)) return {};
    if (auto* f = std::get_if<UnaryFn>(&node.kind)) {
        Monomial a = oracle_node(*node.left, sig);
        switch (*f) {
            case UnaryFn::Neg:
                return a;
            case UnaryFn::Sqrt: {
                Monomial out;
                for (auto [v, p] : a) {
                    if (p % 2 != 0) throw UnitViolation{};
                    out[v] = p / 2;
                }
                return out;
            }
            default:
                if (!a.empty()) throw UnitViolation{};
                return {};
        }
    }
    auto op = std::get<BinaryOp>(node.kind);
    Monomial a = oracle_node(*node.left, sig);
    Monomial b = oracle_node(*node.right, sig);
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
            if (a != b) throw UnitViolation{};
            return a;
        case BinaryOp::Mul:
            return mono_mul(a, b);
        case BinaryOp::Div:
            return mono_mul(a, b, -1);
        case BinaryOp::Pow: {
            if (!b.empty()) throw UnitViolation{};
            if (a.empty()) return {};
            auto* c = std::get_if<Constant>(&node.right->kind);
            if (!c || *c != Constant{std::nearbyint(c->value)}) throw UnitViolation{};
            Monomial out;
            for (auto [v, p] : a) out[v] = p * static_cast<int>(c->value);
            return out;
        }
    }
    throw UnitViolation{};
}

bool oracle(const ExpressionTree& tree, const DimSignature& sig, Dim& out) {
    try {
        out = mono_total(oracle_node(*tree.root(), sig));
        return true;
    } catch (const UnitViolation&) {
        return false;
    }
}

void strip_dormant_node(Node& node) {
    if (node.is_unary()) node.right.reset();
    if (node.left) strip_dormant_node(*node.left);
    if (node.right) strip_dormant_node(*node.right);
}

ExpressionTree strip_dormant(const ExpressionTree& tree) {
    ExpressionTree copy = tree;
    strip_dormant_node(*copy.root());
    return copy;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- criteria ----

void criterion_1() {
    auto ds = generate("invmass", 1000, 4101);
    RunOptions opt;
    opt.cfg = campaign_config();
    opt.cfg.p_mut = 0.15;  // heavier mutation keeps plain SR off the E^2 plateau
    opt.spec = {Metric::MAE, 1e-4, 1e30};
    opt.reference = "invariant_mass";
    auto [plain, dcsr] = compare_modes(opt, ds, 100, 20000, 1);
    double z = two_proportion_z(plain.successes, 100, dcsr.successes, 100);
    bool pass = plain.successes >= 10 && dcsr.successes > plain.successes &&
                (z > 2.0 || dcsr.successes >= 2 * plain.successes);
    std::ostringstream ss;
    ss << "invmass exact recovery: plain " << plain.successes << "/100, dcsr "
       << dcsr.successes << "/100, z=" << z;
    report(1, pass, ss.str());
}

std::pair<CampaignReport, CampaignReport> mt_campaign(Metric metric) {
    // gentle transverse boost: with the default Exp(10) boost no partial
    // assembly of the MT combination beats the predict-zero trap and the
    // search has no gradient at all
    GenParams p;
    p.pt_mean = 2.0;
    auto ds = generate("mt", 2000, 4202, p);
    RunOptions opt;
    opt.cfg = campaign_config();
    opt.cfg.p_const = 0.2;  // the optimum is c * MT^2, so constants are needed
    opt.spec = {metric, 1e-4, 1e30};
    opt.reference = "transverse_mass";
    return compare_modes(opt, ds, 40, 21000, 1);
}

void criteria_2_3() {
    auto [plain, dcsr] = mt_campaign(Metric::FracMAE);
    bool pass2 = dcsr.successes > plain.successes && dcsr.successes > 0;
    std::ostringstream s2;
    s2 << "mt up-to-constant recovery (frac_mae): " << ratio("plain", plain.successes, 40)
       << ", " << ratio("dcsr", dcsr.successes, 40);
    report(2, pass2, s2.str());

    auto [rplain, rdcsr] = mt_campaign(Metric::RMS);
    int frac_total = plain.successes + dcsr.successes;
    int rms_total = rplain.successes + rdcsr.successes;
    std::ostringstream s3;
    s3 << "rms trap: frac_mae " << frac_total << "/80 vs rms " << rms_total << "/80";
    report(3, rms_total < frac_total, s3.str());
}

void criterion_4() {
    auto ds = generate("invmass", 1000, 4303);
    Config cfg = campaign_config();
    cfg.n_gen = 50;
    cfg.dcsr = true;
    cfg.n_var = static_cast<int>(ds.n_cols());
    cfg.dim_signature = ds.signature();
    cfg.seed = 404;
    FitnessSpec spec{Metric::MAE, 1e-4, 1e30};

    Rng rng(cfg.seed);
    Population pop = initialize(cfg, rng);
    long checked = 0, violations = 0;
    for (int g = 0; g <= cfg.n_gen; ++g) {
        for (const auto& ind : pop.individuals) {
            ++checked;
            auto d = infer_dimension(ind.tree, *cfg.dim_signature);
            if (!d.ok() || *d.dim != 2) ++violations;
        }
        if (g == cfg.n_gen) break;
        auto split = make_split(ds.n_rows(), rng);
        evaluate_population(pop, ds, split.testing, spec);
        pop = breed(pop, cfg, rng);
    }
    std::ostringstream ss;
    ss << "dimensional closure: " << violations << " violations in " << checked
       << " individuals over 50 generations";
    report(4, violations == 0, ss.str());
}

void criterion_5() {
    Config cfg;
    cfg.n_var = 4;
    cfg.m_depth = 6;
    cfg.p_dormant = 0.4;
    DimSignature sig{{1, 1, 0, 1}, 2};
    Rng rng(505);
    int agree = 0;
    const int total = 1000;
    for (int t = 0; t < total; ++t) {
        auto tree = random_tree(cfg, rng, false);
        auto mine = infer_dimension(tree, sig);
        Dim od = 0;
        bool ok = oracle(strip_dormant(tree), sig, od);
        if (mine.ok() == ok && (!ok || *mine.dim == od)) ++agree;
    }
    report(5, agree == total,
           "dimension oracle agreement on " + std::to_string(agree) + "/1000 random trees");
}

void criterion_6() {
    auto pa = parse("((v1 + v2) * v3)");
    auto pb = parse("(v5 / (v4 - v1))");
    crossover_swap(pa.root()->right.get(), pb.root()->right.get());
    bool pass = serialize(pa) == "((v1 + v2) * (v4 - v1))";
    report(6, pass, "forced-locator crossover child: " + serialize(pa));
}

void criterion_7() {
    auto ds = generate("hww", 1000, 707);
    auto tree = find_reference("s_mass").instantiate(ds.columns);

    auto d = infer_dimension(tree, ds.signature());
    bool dim_ok = d.ok() && *d.dim == 2;

    bool sym_ok = true;
    std::vector<double> pred(ds.n_rows());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        auto r = ds.row(i);
        std::vector<double> swapped(r.begin(), r.end());
        for (int k = 0; k < 5; ++k) std::swap(swapped[k], swapped[k + 5]);
        auto a = evaluate(tree, {r});
        auto b = evaluate(tree, {swapped});
        if (!a || !b || std::fabs(*a - *b) > 1e-12 * std::max(1.0, std::fabs(*a)))
            sym_ok = false;
        pred[i] = a.value_or(0.0);
    }

    auto rank = [](const std::vector<double>& x) {
        std::vector<std::size_t> order(x.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto i, auto j) { return x[i] < x[j]; });
        std::vector<double> r(x.size());
        for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = static_cast<double>(k);
        return r;
    };
    auto ra = rank(pred), rb = rank(ds.targets);
    double n = static_cast<double>(pred.size()), m = (n - 1) / 2;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        num += (ra[i] - m) * (rb[i] - m);
        da += (ra[i] - m) * (ra[i] - m);
        db += (rb[i] - m) * (rb[i] - m);
    }
    double rho = num / std::sqrt(da * db);

    std::ostringstream ss;
    ss << "s_mass: dim " << (dim_ok ? "2" : "bad") << ", lepton-exchange "
       << (sym_ok ? "symmetric" : "broken") << ", spearman " << rho;
    report(7, dim_ok && sym_ok && rho > 0.5, ss.str());
}

void criterion_8() {
    auto ds = generate("invmass", 300, 808);
    RunOptions opt;
    opt.cfg = campaign_config();
    opt.cfg.n_gen = 50;
    opt.spec = {Metric::MAE, 1e-4, 1e30};

    auto d1 = fs::temp_directory_path() / "sr_accept_jobs1";
    auto d8 = fs::temp_directory_path() / "sr_accept_jobs8";
    fs::remove_all(d1);
    fs::remove_all(d8);
    opt.out_dir = d1.string();
    run_campaign(opt, ds, 8, 30000, 1);
    opt.out_dir = d8.string();
    run_campaign(opt, ds, 8, 30000, 8);

    bool pass = true;
    for (int i = 0; i < 8; ++i) {
        auto name = "run_" + std::to_string(30000 + i) + ".csv";
        if (slurp(d1 / name) != slurp(d8 / name)) pass = false;
    }
    fs::remove_all(d1);
    fs::remove_all(d8);
    report(8, pass, "per-run CSV traces byte-identical for --jobs 1 vs --jobs 8");
}

void criterion_9() {
    Dataset ds;
    ds.columns = {"v1"};
    for (double x : {1.0, 2.0, 3.0}) ds.push_row(std::vector{x}, 2.0 * x);
    auto tree = parse("v1");  // residuals -1,-2,-3
    auto rel_ok = [](double got, double expect) {
        return std::fabs(got - expect) <= 1e-12 * std::fabs(expect);
    };
    FitnessSpec spec{Metric::MAE, 0.0, 1e30};
    bool fixtures = rel_ok(score(tree, ds, spec), 2.0);
    spec.metric = Metric::FracMAE;
    fixtures = fixtures && rel_ok(score(tree, ds, spec), 0.5);
    spec.metric = Metric::RMS;
    fixtures = fixtures && rel_ok(score(tree, ds, spec), std::sqrt(14.0 / 3.0));

    Rng rng(909);
    int holds = 0;
    const int total = 1000;
    for (int t = 0; t < total; ++t) {
        Dataset rds;
        rds.columns = {"v1"};
        std::size_t n = 1 + rng.index(50);
        for (std::size_t i = 0; i < n; ++i)
            rds.push_row(std::vector{rng.uniform(-100.0, 100.0)}, rng.uniform(-10.0, 10.0));
        FitnessSpec mae{Metric::MAE, 0.0, 1e30}, rms{Metric::RMS, 0.0, 1e30};
        if (score(tree, rds, rms) >= score(tree, rds, mae) - 1e-12) ++holds;
    }
    std::ostringstream ss;
    ss << "metric fixtures " << (fixtures ? "exact" : "off") << ", RMS>=MAE on " << holds
       << "/1000 residual sets";
    report(9, fixtures && holds == total, ss.str());
}

void criterion_10() {
    bool pass = true;
    std::string detail = "elite trace non-increasing over 200 generations:";
    for (const char* kind : {"invmass", "mt", "hww"}) {
        auto ds = generate(kind, 500, 1010);
        Config cfg = campaign_config();
        cfg.seed = 11;
        FitnessSpec spec{Metric::MAE, 1e-4, 1e30};
        auto r = run(cfg, ds, spec);
        bool mono = r.records.size() == 201;
        for (std::size_t i = 1; i < r.records.size(); ++i)
            if (r.records[i].elite_fitness > r.records[i - 1].elite_fitness) mono = false;
        detail += std::string(" ") + kind + (mono ? "=ok" : "=BROKEN");
        pass = pass && mono;
    }
    report(10, pass, detail);
}

}  // namespace

int main() {
    criterion_6();
    criterion_5();
    criterion_9();
    criterion_7();
    criterion_4();
    criterion_8();
    criterion_10();
    criterion_1();
    criteria_2_3();
    std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
    return failures == 0 ? 0 : 1;
}
