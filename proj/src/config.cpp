#include "sr/config.hpp"

#include <fstream>
#include <sstream>

namespace sr {

namespace {

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("invalid boolean value '" + v + "'");
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void Config::validate() const {
    if (n_var < 0) throw ConfigError("n_var must be >= 0");
    if (n_pop < 1) throw ConfigError("n_pop must be >= 1");
    if (n_gen < 0) throw ConfigError("n_gen must be >= 0");
    if (n_copy < 0 || n_copy > n_pop) throw ConfigError("n_copy must be in [0, n_pop]");
    if (n_tourn < 1 || n_tourn > n_pop) throw ConfigError("n_tourn must be in [1, n_pop]");
    if (!b_doublet && n_tourn < 2)
        throw ConfigError("single tournament needs n_tourn >= 2");
    if (m_depth < 1) throw ConfigError("m_depth must be >= 1");
    for (double p : {p_xover, p_mut, p_drop, p_const, internal_bias, p_dormant})
        if (p < 0.0 || p > 1.0) throw ConfigError("probabilities must lie in [0, 1]");
    if (op_probs.sum() > 1.0 + 1e-12)
        throw ConfigError("operator probabilities exceed 1");
    if (parsimony < 0.0) throw ConfigError("parsimony must be >= 0");
    if (constant_min > constant_max) throw ConfigError("empty constant range");
    if (dcsr) {
        if (!dim_signature) throw ConfigError("dcsr requires a dimension signature");
        for (Dim d : dim_signature->var_dims)
            if (d != 0 && d != 1) throw ConfigError("variable dimensions must be 0 or 1");
        if (n_var != 0 && static_cast<int>(dim_signature->var_dims.size()) != n_var)
            throw ConfigError("dimension signature length does not match n_var");
    }
}

void Config::set(const std::string& key, const std::string& value) {
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };

    if (key == "n_var") n_var = as_int();
    else if (key == "n_gen") n_gen = as_int();
    else if (key == "n_pop") n_pop = as_int();
    else if (key == "n_tourn") n_tourn = as_int();
    else if (key == "b_doublet") b_doublet = parse_bool(value);
    else if (key == "m_depth") m_depth = as_int();
    else if (key == "n_copy") n_copy = as_int();
    else if (key == "p_xover") p_xover = as_double();
    else if (key == "p_mut") p_mut = as_double();
    else if (key == "p_drop") p_drop = as_double();
    else if (key == "p_const") p_const = as_double();
    else if (key == "op_probs.add") op_probs.add = as_double();
    else if (key == "op_probs.sub") op_probs.sub = as_double();
    else if (key == "op_probs.mul") op_probs.mul = as_double();
    else if (key == "op_probs.div") op_probs.div = as_double();
    else if (key == "op_probs.pow") op_probs.pow = as_double();
    else if (key == "op_probs.neg") op_probs.neg = as_double();
    else if (key == "op_probs.sqrt") op_probs.sqrt = as_double();
    else if (key == "op_probs.log") op_probs.log = as_double();
    else if (key == "op_probs.sin") op_probs.sin = as_double();
    else if (key == "op_probs.cos") op_probs.cos = as_double();
    else if (key == "op_probs.exp") op_probs.exp = as_double();
    else if (key == "op_probs.step") op_probs.step = as_double();
    else if (key == "internal_bias") internal_bias = as_double();
    else if (key == "parsimony") parsimony = as_double();
    else if (key == "constant_min") constant_min = as_double();
    else if (key == "constant_max") constant_max = as_double();
    else if (key == "dcsr") dcsr = parse_bool(value);
    else if (key == "target_dim") {
        if (!dim_signature) dim_signature.emplace();
        dim_signature->target = as_int();
    } else if (key == "fill_to_max") fill_to_max = parse_bool(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "dormant") dormant = parse_bool(value);
    else if (key == "p_dormant") p_dormant = as_double();
    else if (key == "max_pow_exponent") max_pow_exponent = as_int();
    else throw ConfigError("unknown config key '" + key + "'");
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

void Config::apply_overrides(const std::vector<std::string>& kvs) {
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + kv + "' is not of the form key=value");
        set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
}

}  // namespace sr
