#include "sr/physics.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sr {

namespace {

struct Vec4 {
    double e, x, y, z;

    double pt() const { return std::hypot(x, y); }
    double p2() const { return x * x + y * y + z * z; }
    double m2() const { return e * e - p2(); }
};

// Boosts a 4-vector given in the rest frame of `parent` into the lab.
Vec4 boost_to_lab(const Vec4& rest, const Vec4& parent) {
    double m = std::sqrt(parent.m2());
    double gamma = parent.e / m;
    double bx = parent.x / parent.e, by = parent.y / parent.e, bz = parent.z / parent.e;
    double b2 = bx * bx + by * by + bz * bz;
    double bp = bx * rest.x + by * rest.y + bz * rest.z;
    double k = (b2 > 0.0) ? (gamma - 1.0) * bp / b2 + gamma * rest.e : 0.0;
    return Vec4{gamma * (rest.e + bp), rest.x + k * bx, rest.y + k * by, rest.z + k * bz};
}

std::array<double, 3> isotropic(Rng& rng) {
    double cos_t = rng.uniform(-1.0, 1.0);
    double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

// Daughter momentum magnitude of a two-body decay M -> m1 + m2.
double two_body_momentum(double M, double m1, double m2) {
    double lambda = (M * M - (m1 + m2) * (m1 + m2)) * (M * M - (m1 - m2) * (m1 - m2));
    return std::sqrt(std::max(0.0, lambda)) / (2.0 * M);
}

}  // namespace

Dataset gen_invariant_mass(std::size_t n, Rng& rng, const GenParams& p) {
    Dataset ds;
    ds.name = "invmass";
    ds.columns = {"px", "py", "pz", "E"};
    ds.dims = {1, 1, 1, 1};
    ds.target_name = "m2";
    ds.target_dim = 2;
    std::ostringstream ps;
    ps << "generator=invmass n=" << n << " momentum_mean=" << p.momentum_mean;
    ds.params = ps.str();

    for (std::size_t i = 0; i < n; ++i) {
        double m = rng.uniform_open_lo(0.0, 100.0);
        double pmag = rng.exponential(p.momentum_mean);
        auto dir = isotropic(rng);
        double px = pmag * dir[0], py = pmag * dir[1], pz = pmag * dir[2];
        double e = std::sqrt(m * m + pmag * pmag);
        ds.push_row(std::array{px, py, pz, e}, m * m);
    }
    return ds;
}

Dataset gen_transverse_mass(std::size_t n, Rng& rng, const GenParams& p) {
    Dataset ds;
    ds.name = "mt";
    ds.columns = {"ptl", "pxl", "pyl", "pzl", "met", "metx", "mety"};
    ds.dims = {1, 1, 1, 1, 1, 1, 1};
    ds.target_name = "m2";
    ds.target_dim = 2;
    std::ostringstream ps;
    ps << "generator=mt n=" << n << " pt_mean=" << p.pt_mean << " pz_sigma=" << p.pz_sigma;
    ds.params = ps.str();

    for (std::size_t i = 0; i < n; ++i) {
        double m = rng.uniform_open_lo(0.0, 100.0);
        double pt = rng.exponential(p.pt_mean);
        double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        double pz = rng.normal(0.0, p.pz_sigma);
        Vec4 parent{std::sqrt(m * m + pt * pt + pz * pz), pt * std::cos(phi),
                    pt * std::sin(phi), pz};

        auto dir = isotropic(rng);
        double estar = m / 2.0;
        Vec4 lep_rest{estar, estar * dir[0], estar * dir[1], estar * dir[2]};
        Vec4 nu_rest{estar, -lep_rest.x, -lep_rest.y, -lep_rest.z};
        Vec4 lep = boost_to_lab(lep_rest, parent);
        Vec4 nu = boost_to_lab(nu_rest, parent);

        ds.push_row(std::array{lep.pt(), lep.x, lep.y, lep.z, nu.pt(), nu.x, nu.y}, m * m);
    }
    return ds;
}

Dataset gen_dilepton_higgs(std::size_t n, Rng& rng, const GenParams& p) {
    Dataset ds;
    ds.name = "hww";
    ds.columns = {"p1t", "p1x", "p1y", "p1z", "e1",
                  "p2t", "p2x", "p2y", "p2z", "e2",
                  "met", "metx", "mety"};
    ds.dims = std::vector<Dim>(13, 1);
    ds.target_name = "mh2";
    ds.target_dim = 2;
    std::ostringstream ps;
    ps << "generator=hww n=" << n << " mass_min=" << p.mass_min << " mass_max=" << p.mass_max
       << " w_mass=" << p.w_mass << " pt_mean=" << p.pt_mean;
    ds.params = ps.str();

    for (std::size_t i = 0; i < n; ++i) {
        double mh = rng.uniform(p.mass_min, p.mass_max);
        double pt = rng.exponential(p.pt_mean);
        double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        Vec4 higgs{std::sqrt(mh * mh + pt * pt), pt * std::cos(phi), pt * std::sin(phi), 0.0};

        // on-shell W when the window allows; the off-shell mass piles up
        // near the kinematic edge, as the propagator weight would make it
        double m1 = std::min(p.w_mass, mh);
        double window = std::max(1e-6, mh - m1);
        double delta = std::min(rng.exponential(p.wstar_edge_mean), 0.9 * window);
        double m2 = window - delta;

        double q = two_body_momentum(mh, m1, m2);
        auto dir = isotropic(rng);
        double e1 = std::sqrt(m1 * m1 + q * q), e2 = std::sqrt(m2 * m2 + q * q);
        Vec4 w1 = boost_to_lab({e1, q * dir[0], q * dir[1], q * dir[2]}, higgs);
        Vec4 w2 = boost_to_lab({e2, -q * dir[0], -q * dir[1], -q * dir[2]}, higgs);

        auto decay_w = [&](const Vec4& w, double mw) {
            auto d = isotropic(rng);
            double estar = mw / 2.0;
            Vec4 lep = boost_to_lab({estar, estar * d[0], estar * d[1], estar * d[2]}, w);
            Vec4 nu = boost_to_lab({estar, -estar * d[0], -estar * d[1], -estar * d[2]}, w);
            return std::pair{lep, nu};
        };
        auto [lep1, nu1] = decay_w(w1, m1);
        auto [lep2, nu2] = decay_w(w2, m2);

        double metx = nu1.x + nu2.x, mety = nu1.y + nu2.y;
        ds.push_row(std::array{lep1.pt(), lep1.x, lep1.y, lep1.z, lep1.e,
                               lep2.pt(), lep2.x, lep2.y, lep2.z, lep2.e,
                               std::hypot(metx, mety), metx, mety},
                    mh * mh);
    }
    return ds;
}

Dataset generate(const std::string& kind, std::size_t n, std::uint64_t seed,
                 const GenParams& p) {
    Rng rng(seed);
    Dataset ds;
    if (kind == "invmass") ds = gen_invariant_mass(n, rng, p);
    else if (kind == "mt") ds = gen_transverse_mass(n, rng, p);
    else if (kind == "hww") ds = gen_dilepton_higgs(n, rng, p);
    else throw DatasetError("unknown generator '" + kind + "'");
    ds.seed = seed;
    return ds;
}

ExpressionTree ReferenceFormula::instantiate(const std::vector<std::string>& columns) const {
    return parse(expr_text, columns);
}

const std::vector<ReferenceFormula>& reference_registry() {
    static const std::vector<ReferenceFormula> registry = {
        {"invariant_mass",
         "((((E * E) - (px * px)) - (py * py)) - (pz * pz))",
         EquivMode::Exact},
        {"transverse_mass",
         "((ptl * met) - ((pxl * metx) + (pyl * mety)))",
         EquivMode::UpToConstant},
        {"s_mass",
         "(((2 * (p1t * p1t)) + (2 * (p2t * p2t)))"
         " + (3 * ((((p1t * p2t) + (met * (p1t + p2t)))"
         " - ((metx * (p1x + p2x)) + (mety * (p1y + p2y))))"
         " - (2 * ((p1x * p2x) + (p1y * p2y))))))",
         EquivMode::Exact},
    };
    return registry;
}

const ReferenceFormula& find_reference(const std::string& name) {
    for (const auto& r : reference_registry())
        if (r.name == name) return r;
    throw std::invalid_argument("unknown reference formula '" + name + "'");
}

EquivVerdict equivalent(const ExpressionTree& candidate, const ExpressionTree& reference,
                        const Dataset& probes, double tol, EquivMode mode) {
    EquivVerdict v;
    const std::size_t n = probes.n_rows();
    std::vector<double> cand(n), ref(n);
    double max_abs_ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto c = evaluate(candidate, {probes.row(i)});
        if (!c) return v;  // invalid on any probe -> not equivalent
        auto r = evaluate(reference, {probes.row(i)});
        if (!r) return v;
        cand[i] = *c;
        ref[i] = *r;
        max_abs_ref = std::max(max_abs_ref, std::fabs(ref[i]));
    }
    if (n == 0 || max_abs_ref == 0.0) return v;

    double c_fit = 1.0;
    if (mode == EquivMode::UpToConstant) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += cand[i] * ref[i];
            den += ref[i] * ref[i];
        }
        if (den == 0.0) return v;
        c_fit = num / den;
        if (!std::isfinite(c_fit) || c_fit == 0.0) return v;
    }

    // small-|ref| rows are judged against the overall scale, not their
    // own near-zero value
    double floor = 1e-8 * max_abs_ref;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double expect = c_fit * ref[i];
        double rel = std::fabs(cand[i] - expect) / std::max(std::fabs(expect), floor);
        worst = std::max(worst, rel);
    }
    v.constant = c_fit;
    v.max_rel_error = worst;
    v.equivalent = worst <= tol;
    return v;
}

}  // namespace sr
