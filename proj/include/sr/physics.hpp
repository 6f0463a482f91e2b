#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sr/dataset.hpp"
#include "sr/expr.hpp"
#include "sr/rng.hpp"

namespace sr {

struct GenParams {
    double pt_mean = 10.0;        // exponential mean of the parent transverse boost [GeV]
    double pz_sigma = 50.0;       // longitudinal spread for the mt generator [GeV]
    double momentum_mean = 50.0;  // exponential mean of |p| for the invmass generator [GeV]
    double mass_min = 120.0;      // Higgs mass window for the dilepton generator [GeV]
    double mass_max = 200.0;
    double w_mass = 80.4;
    double wstar_edge_mean = 1.0;  // exponential offset of the W* mass below its edge [GeV]
};

// (px,py,pz,E) rows with target m^2: mass uniform on (0,100], isotropic
// 3-momentum with an exponential magnitude, E fixed by the mass shell.
Dataset gen_invariant_mass(std::size_t n, Rng& rng, const GenParams& p = {});

// Massive parent -> lepton + neutrino, both massless. Columns
// (ptl,pxl,pyl,pzl,met,metx,mety), target m^2. The MET components are
// the neutrino transverse momentum.
Dataset gen_transverse_mass(std::size_t n, Rng& rng, const GenParams& p = {});

// H -> W W* -> l nu l nu with an on-shell W where allowed and a small
// transverse boost of the H. Columns
// (p1t,p1x,p1y,p1z,e1,p2t,p2x,p2y,p2z,e2,met,metx,mety), target M_H^2.
Dataset gen_dilepton_higgs(std::size_t n, Rng& rng, const GenParams& p = {});

Dataset generate(const std::string& kind, std::size_t n, std::uint64_t seed,
                 const GenParams& p = {});

enum class EquivMode { Exact, UpToConstant };

struct ReferenceFormula {
    std::string name;
    std::string expr_text;  // over the column names of its dataset
    EquivMode mode;

    ExpressionTree instantiate(const std::vector<std::string>& columns) const;
};

const std::vector<ReferenceFormula>& reference_registry();
const ReferenceFormula& find_reference(const std::string& name);

struct EquivVerdict {
    bool equivalent = false;
    double constant = 1.0;       // fitted multiplicative constant (UpToConstant)
    double max_rel_error = 0.0;
};

// Probe-based numeric equivalence. Exact mode compares directly;
// up-to-constant mode first fits one multiplicative constant by least
// squares. An invalid candidate evaluation on any probe row fails.
EquivVerdict equivalent(const ExpressionTree& candidate, const ExpressionTree& reference,
                        const Dataset& probes, double tol, EquivMode mode);

}  // namespace sr
