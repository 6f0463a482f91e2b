#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sr/config.hpp"

namespace sr {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Column-labelled numeric event table with per-column dimensions and a
// target column, plus the generator provenance needed to reproduce it.
class Dataset {
public:
    std::string name;
    std::vector<std::string> columns;
    std::vector<Dim> dims;  // may be empty when the source file carries none
    std::string target_name;
    Dim target_dim = 0;
    std::uint64_t seed = 0;
    std::string params;  // free-form generator parameter description

    std::vector<double> values;   // row-major, stride = columns.size()
    std::vector<double> targets;  // one per row

    std::size_t n_rows() const { return targets.size(); }
    std::size_t n_cols() const { return columns.size(); }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * columns.size(), columns.size()};
    }

    void push_row(std::span<const double> row, double target) {
        values.insert(values.end(), row.begin(), row.end());
        targets.push_back(target);
    }

    bool has_dims() const { return !dims.empty(); }

    DimSignature signature() const {
        if (!has_dims()) throw DatasetError("dataset '" + name + "' carries no dimension info");
        return DimSignature{dims, target_dim};
    }

    void check_rectangular() const;
};

// Text format: '#'-prefixed header lines (name, columns, dims, target,
// target_dim, seed, params) followed by comma-separated numeric rows
// whose final column is the target. Values render at full precision so
// a save/load round trip is bit-exact.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace sr
