#include "sr/campaign.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace sr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json config_to_json(const Config& c) {
    json j{{"n_var", c.n_var},       {"n_gen", c.n_gen},
           {"n_pop", c.n_pop},       {"n_tourn", c.n_tourn},
           {"b_doublet", c.b_doublet}, {"m_depth", c.m_depth},
           {"n_copy", c.n_copy},     {"p_xover", c.p_xover},
           {"p_mut", c.p_mut},       {"p_drop", c.p_drop},
           {"p_const", c.p_const},   {"internal_bias", c.internal_bias},
           {"parsimony", c.parsimony}, {"dcsr", c.dcsr},
           {"fill_to_max", c.fill_to_max}, {"seed", c.seed},
           {"dormant", c.dormant},   {"p_dormant", c.p_dormant}};
    j["op_probs"] = {{"add", c.op_probs.add},  {"sub", c.op_probs.sub},
                     {"mul", c.op_probs.mul},  {"div", c.op_probs.div},
                     {"pow", c.op_probs.pow},  {"neg", c.op_probs.neg},
                     {"sqrt", c.op_probs.sqrt}, {"log", c.op_probs.log},
                     {"sin", c.op_probs.sin},  {"cos", c.op_probs.cos},
                     {"exp", c.op_probs.exp},  {"step", c.op_probs.step}};
    if (c.dim_signature) {
        j["target_dim"] = c.dim_signature->target;
        j["var_dims"] = c.dim_signature->var_dims;
    }
    return j;
}

}  // namespace

Dataset make_probes(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    if (ds.name == "invmass" || ds.name == "mt" || ds.name == "hww")
        return generate(ds.name, n, seed);

    Dataset probes = ds;
    if (probes.n_rows() > n) {
        Rng rng(seed);
        Dataset cut;
        cut.columns = ds.columns;
        cut.name = ds.name;
        cut.dims = ds.dims;
        cut.target_dim = ds.target_dim;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = rng.index(ds.n_rows());
            cut.push_row(ds.row(r), ds.targets[r]);
        }
        return cut;
    }
    return probes;
}

Config jitter_config(const Config& cfg, std::uint64_t run_seed) {
    Rng rng(run_seed ^ 0x9e3779b97f4a7c15ull);
    Config out = cfg;
    double terminal = cfg.op_probs.terminal();
    double arith[4];
    double budget = 1.0 - terminal;
    for (int attempt = 0;; ++attempt) {
        double sum = 0.0;
        for (double& a : arith) {
            a = rng.uniform(0.05, 0.25);
            sum += a;
        }
        if (sum < budget || attempt > 64) {
            if (sum >= budget) {  // squeeze into the available mass
                for (double& a : arith) a *= 0.9 * budget / sum;
                sum = 0.0;
                for (double a : arith) sum += a;
            }
            double rest = (budget - sum) / 8.0;
            out.op_probs = {arith[0], arith[1], arith[2], arith[3],
                            rest, rest, rest, rest, rest, rest, rest, rest};
            return out;
        }
    }
}

RunOutcome run_single(const RunOptions& opt, const Dataset& ds) {
    RunOutcome out;
    try {
        Config cfg = opt.jitter ? jitter_config(opt.cfg, opt.cfg.seed) : opt.cfg;
        out.report = run(cfg, ds, opt.spec);

        if (opt.reference) {
            const ReferenceFormula& ref = find_reference(*opt.reference);
            ExpressionTree ref_tree = ref.instantiate(ds.columns);
            Dataset probes = make_probes(ds, opt.probe_rows, ds.seed + 0x5eedULL);
            double tol = ref.mode == EquivMode::Exact ? opt.tol_exact : opt.tol_const;
            out.verdict = equivalent(out.report.best, ref_tree, probes, tol, ref.mode);
            out.success = out.verdict.equivalent;
        }
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    if (!opt.out_dir.empty()) write_run_files(out, opt.out_dir);
    return out;
}

std::string run_csv(const RunReport& report) {
    std::string csv = "generation,split_fitness,elite_fitness,nodes\n";
    for (const auto& r : report.records) {
        csv += std::to_string(r.generation);
        csv += ',';
        csv += fmt(r.split_fitness);
        csv += ',';
        csv += fmt(r.elite_fitness);
        csv += ',';
        csv += std::to_string(r.elite_nodes);
        csv += '\n';
    }
    return csv;
}

void write_run_files(const RunOutcome& out, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const std::string stem = "run_" + std::to_string(out.report.seed);

    std::ofstream csv(fs::path(out_dir) / (stem + ".csv"));
    csv << run_csv(out.report);

    json j;
    j["seed"] = out.report.seed;
    j["config"] = config_to_json(out.report.config);
    j["best_expression"] = serialize(out.report.best);
    j["best_fitness"] = out.report.best_fitness;
    j["duration_sec"] = out.report.duration_sec;
    j["failed"] = out.failed;
    if (out.failed) j["error"] = out.error;
    j["verdict"] = {{"equivalent", out.verdict.equivalent},
                    {"constant", out.verdict.constant},
                    {"max_rel_error", out.verdict.max_rel_error}};
    std::ofstream js(fs::path(out_dir) / (stem + ".json"));
    js << j.dump(2) << '\n';
}

CampaignReport run_campaign(const RunOptions& opt, const Dataset& ds, int n_runs,
                            std::uint64_t base_seed, int jobs) {
    if (n_runs < 1) throw ConfigError("a campaign needs at least one run");
    if (jobs < 1) jobs = 1;

    CampaignReport report;
    report.runs.resize(n_runs);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n_runs) return;
            RunOptions ro = opt;
            ro.cfg.seed = base_seed + static_cast<std::uint64_t>(i);
            report.runs[i] = run_single(ro, ds);
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(jobs, n_runs); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (const auto& r : report.runs)
        if (r.success) ++report.successes;
    report.success_fraction = static_cast<double>(report.successes) / n_runs;
    return report;
}

std::pair<CampaignReport, CampaignReport> compare_modes(const RunOptions& opt,
                                                        const Dataset& ds, int n_runs,
                                                        std::uint64_t base_seed, int jobs) {
    RunOptions plain = opt;
    plain.cfg.dcsr = false;
    if (!plain.out_dir.empty()) plain.out_dir += "/plain";

    RunOptions dcsr = opt;
    dcsr.cfg.dcsr = true;
    if (!dcsr.cfg.dim_signature) dcsr.cfg.dim_signature = ds.signature();
    if (!dcsr.out_dir.empty()) dcsr.out_dir += "/dcsr";

    auto a = run_campaign(plain, ds, n_runs, base_seed, jobs);
    auto b = run_campaign(dcsr, ds, n_runs, base_seed, jobs);
    return {std::move(a), std::move(b)};
}

double two_proportion_z(int s1, int n1, int s2, int n2) {
    if (n1 == 0 || n2 == 0) return 0.0;
    double p1 = static_cast<double>(s1) / n1;
    double p2 = static_cast<double>(s2) / n2;
    double p = static_cast<double>(s1 + s2) / (n1 + n2);
    double se = std::sqrt(p * (1.0 - p) * (1.0 / n1 + 1.0 / n2));
    if (se == 0.0) return 0.0;
    return (p2 - p1) / se;
}

void write_campaign_summary(const CampaignReport& report, const std::string& out_dir,
                            const std::string& label) {
    fs::create_directories(out_dir);

    json j;
    j["label"] = label;
    j["n_runs"] = report.runs.size();
    j["successes"] = report.successes;
    j["success_fraction"] = report.success_fraction;
    json runs = json::array();
    for (const auto& r : report.runs) {
        runs.push_back({{"seed", r.report.seed},
                        {"success", r.success},
                        {"failed", r.failed},
                        {"best_fitness", r.failed ? 0.0 : r.report.best_fitness},
                        {"best_expression", serialize(r.report.best)},
                        {"constant", r.verdict.constant}});
    }
    j["runs"] = runs;
    std::ofstream js(fs::path(out_dir) / ("campaign_" + label + ".json"));
    js << j.dump(2) << '\n';

    std::ofstream csv(fs::path(out_dir) / ("campaign_" + label + "_traces.csv"));
    csv << "seed,generation,split_fitness,elite_fitness,nodes\n";
    for (const auto& r : report.runs)
        for (const auto& g : r.report.records)
            csv << r.report.seed << ',' << g.generation << ',' << fmt(g.split_fitness) << ','
                << fmt(g.elite_fitness) << ',' << g.elite_nodes << '\n';
}

}  // namespace sr
