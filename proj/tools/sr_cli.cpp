#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sr/campaign.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string data_path;
    std::string out_dir = "sr_out";
    std::string reference;
    std::string metric;
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    bool seed_given = false;
    bool dcsr = false;
    double parsimony = -1.0;
    double tol_exact = 1e-3;
    double tol_const = 1e-2;
    std::size_t probes = 256;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "configuration file (key = value lines)");
    cmd->add_option("--data", o.data_path, "dataset file")->required();
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--reference", o.reference,
                    "reference formula for success classification "
                    "(invariant_mass, transverse_mass, s_mass)");
    cmd->add_option("--metric", o.metric, "fitness metric: mae, frac_mae, rms, frac_rms");
    cmd->add_option("--parsimony", o.parsimony, "per-node fitness penalty");
    cmd->add_option("--set", o.overrides, "config override key=value (repeatable)");
    cmd->add_option("--seed", o.seed, "run seed (campaigns: base seed)")
        ->each([&o](const std::string&) { o.seed_given = true; });
    cmd->add_flag("--dcsr", o.dcsr, "enable dimensional constraints");
    cmd->add_option("--tol-exact", o.tol_exact, "equivalence tolerance, exact mode");
    cmd->add_option("--tol-const", o.tol_const, "equivalence tolerance, up-to-constant mode");
    cmd->add_option("--probes", o.probes, "probe rows for the equivalence check");
}

sr::RunOptions build_options(const CommonOpts& o, const sr::Dataset& ds) {
    sr::RunOptions opt;
    if (!o.config_path.empty()) opt.cfg = sr::Config::from_file(o.config_path);
    opt.cfg.apply_overrides(o.overrides);
    if (o.seed_given) opt.cfg.seed = o.seed;
    if (o.dcsr) opt.cfg.dcsr = true;
    if (opt.cfg.n_var == 0) opt.cfg.n_var = static_cast<int>(ds.n_cols());
    if (opt.cfg.dcsr && !opt.cfg.dim_signature) opt.cfg.dim_signature = ds.signature();

    if (!o.metric.empty()) opt.spec.metric = sr::metric_from_name(o.metric);
    // --parsimony wins over a config-file/--set value; either way the
    // scoring spec and the recorded config agree
    if (o.parsimony >= 0.0) opt.cfg.parsimony = o.parsimony;
    opt.spec.parsimony_coeff = opt.cfg.parsimony;
    if (!o.reference.empty()) opt.reference = o.reference;
    opt.tol_exact = o.tol_exact;
    opt.tol_const = o.tol_const;
    opt.probe_rows = o.probes;
    opt.out_dir = o.out_dir;
    return opt;
}

void print_campaign(const sr::CampaignReport& r, const std::string& label) {
    std::printf("%s: %d/%zu runs successful (%.1f%%)\n", label.c_str(), r.successes,
                r.runs.size(), 100.0 * r.success_fraction);
    for (const auto& run : r.runs)
        if (run.failed)
            std::printf("  seed %llu failed: %s\n",
                        static_cast<unsigned long long>(run.report.seed), run.error.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic regression with optional dimensional constraints"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a toy dataset");
    std::string gen_kind, gen_out = "dataset.txt";
    std::size_t gen_n = 1000;
    std::uint64_t gen_seed = 1;
    sr::GenParams gp;
    gen->add_option("kind", gen_kind, "invmass, mt or hww")->required();
    gen->add_option("--n", gen_n, "number of rows");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output path");
    gen->add_option("--pt-mean", gp.pt_mean, "exponential mean of the parent pT [GeV]");
    gen->add_option("--pz-sigma", gp.pz_sigma, "longitudinal sigma for mt [GeV]");
    gen->add_option("--momentum-mean", gp.momentum_mean, "exponential mean of |p| for invmass");
    gen->add_option("--mass-min", gp.mass_min, "lower Higgs mass bound [GeV]");
    gen->add_option("--mass-max", gp.mass_max, "upper Higgs mass bound [GeV]");

    // run / campaign / compare
    CommonOpts run_o, camp_o, cmp_o;
    int camp_runs = 100, camp_jobs = 1, cmp_runs = 100, cmp_jobs = 1;
    bool camp_jitter = false, cmp_jitter = false;
    std::string camp_label = "campaign";

    auto* runc = app.add_subcommand("run", "single evolution run");
    add_common(runc, run_o);

    auto* camp = app.add_subcommand("campaign", "multi-run campaign with success statistics");
    add_common(camp, camp_o);
    camp->add_option("--runs", camp_runs, "number of runs")->check(CLI::PositiveNumber);
    camp->add_option("--jobs", camp_jobs, "concurrent runs");
    camp->add_flag("--jitter", camp_jitter, "sample per-run operator probabilities");
    camp->add_option("--label", camp_label, "summary file label");

    auto* cmp = app.add_subcommand("compare", "matched-seed campaign with DCSR off and on");
    add_common(cmp, cmp_o);
    cmp->add_option("--runs", cmp_runs, "number of runs")->check(CLI::PositiveNumber);
    cmp->add_option("--jobs", cmp_jobs, "concurrent runs");
    cmp->add_flag("--jitter", cmp_jitter, "sample per-run operator probabilities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            sr::Dataset ds = sr::generate(gen_kind, gen_n, gen_seed, gp);
            sr::save_dataset(ds, gen_out);
            std::printf("wrote %zu rows to %s\n", ds.n_rows(), gen_out.c_str());
            return 0;
        }

        if (runc->parsed()) {
            sr::Dataset ds = sr::load_dataset(run_o.data_path);
            sr::RunOptions opt = build_options(run_o, ds);
            sr::RunOutcome out = sr::run_single(opt, ds);
            if (out.failed) {
                std::fprintf(stderr, "run failed: %s\n", out.error.c_str());
                return 2;
            }
            std::printf("best: %s\n", sr::serialize(out.report.best).c_str());
            std::printf("fitness (full dataset): %.10g\n", out.report.best_fitness);
            if (opt.reference)
                std::printf("equivalent to %s: %s (c=%.6g, max rel err %.3g)\n",
                            opt.reference->c_str(), out.success ? "yes" : "no",
                            out.verdict.constant, out.verdict.max_rel_error);
            return 0;
        }

        if (camp->parsed()) {
            sr::Dataset ds = sr::load_dataset(camp_o.data_path);
            sr::RunOptions opt = build_options(camp_o, ds);
            opt.jitter = camp_jitter;
            sr::CampaignReport rep =
                sr::run_campaign(opt, ds, camp_runs, opt.cfg.seed, camp_jobs);
            sr::write_campaign_summary(rep, opt.out_dir, camp_label);
            print_campaign(rep, camp_label);
            return 0;
        }

        if (cmp->parsed()) {
            sr::Dataset ds = sr::load_dataset(cmp_o.data_path);
            sr::RunOptions opt = build_options(cmp_o, ds);
            opt.jitter = cmp_jitter;
            auto [plain, dcsr] = sr::compare_modes(opt, ds, cmp_runs, opt.cfg.seed, cmp_jobs);
            sr::write_campaign_summary(plain, opt.out_dir, "plain");
            sr::write_campaign_summary(dcsr, opt.out_dir, "dcsr");
            print_campaign(plain, "plain SR");
            print_campaign(dcsr, "DCSR");
            double z = sr::two_proportion_z(plain.successes, cmp_runs, dcsr.successes, cmp_runs);
            std::printf("two-proportion z (dcsr vs plain): %.3f\n", z);
            return 0;
        }
    } catch (const sr::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const sr::DatasetError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
