#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mass dimension in natural units (c = hbar = 1).
using Dim = int;

struct DimSignature {
    std::vector<Dim> var_dims;  // one entry per variable, each 0 or 1
    Dim target = 0;

    bool has_dim(Dim d) const {
        for (Dim v : var_dims)
            if (v == d) return true;
        return false;
    }
};

// Selection probabilities for non-terminal node kinds. Whatever is left
// over (1 - sum) is the probability of drawing a terminal.
struct OpProbs {
    double add = 0.14, sub = 0.14, mul = 0.14, div = 0.10;
    double pow = 0.02, neg = 0.02;
    double sqrt = 0.05, log = 0.02, sin = 0.02, cos = 0.02, exp = 0.02, step = 0.01;

    double sum() const {
        return add + sub + mul + div + pow + neg + sqrt + log + sin + cos + exp + step;
    }
    double terminal() const { return 1.0 - sum(); }
};

struct Config {
    int n_var = 0;
    int n_gen = 200;
    int n_pop = 500;
    int n_tourn = 30;
    bool b_doublet = false;
    int m_depth = 6;
    int n_copy = 1;
    double p_xover = 0.5;
    double p_mut = 0.05;    // per node
    double p_drop = 0.3;    // per mutated node
    double p_const = 0.2;   // terminal draw is a constant with this probability
    OpProbs op_probs;
    double internal_bias = 0.9;
    double parsimony = 1e-4;  // fitness surcharge per node
    double constant_min = -10.0;
    double constant_max = 10.0;
    bool dcsr = false;
    std::optional<DimSignature> dim_signature;
    bool fill_to_max = false;
    std::uint64_t seed = 1;

    // Dormant second leaves on unary nodes.
    bool dormant = true;
    double p_dormant = 0.3;  // chance a fresh unary node gets a dormant leaf

    int max_pow_exponent = 4;  // |k| cap for integer exponents in DCSR
    int xover_retries = 8;
    int dim_build_attempts = 32;

    void validate() const;

    // Flat key-value access used by config files and --set overrides.
    void set(const std::string& key, const std::string& value);
    static Config from_file(const std::string& path);
    void apply_overrides(const std::vector<std::string>& key_equals_value);
};

}  // namespace sr
