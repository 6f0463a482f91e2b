#include "sr/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sr {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t' && c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void Dataset::check_rectangular() const {
    if (columns.empty()) throw DatasetError("dataset has no columns");
    if (values.size() != targets.size() * columns.size())
        throw DatasetError("dataset is not rectangular");
    if (has_dims() && dims.size() != columns.size())
        throw DatasetError("dims length does not match column count");
}

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.check_rectangular();
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write '" + path + "'");

    auto join = [](const auto& xs, auto f) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) s += ',';
            s += f(xs[i]);
        }
        return s;
    };

    out << "# name: " << ds.name << '\n';
    out << "# columns: " << join(ds.columns, [](const std::string& s) { return s; }) << '\n';
    if (ds.has_dims())
        out << "# dims: " << join(ds.dims, [](Dim d) { return std::to_string(d); }) << '\n';
    out << "# target: " << ds.target_name << '\n';
    out << "# target_dim: " << ds.target_dim << '\n';
    out << "# seed: " << ds.seed << '\n';
    if (!ds.params.empty()) out << "# params: " << ds.params << '\n';

    const std::size_t nc = ds.n_cols();
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < nc; ++j) out << fmt(ds.values[i * nc + j]) << ',';
        out << fmt(ds.targets[i]) << '\n';
    }
    if (!out) throw DatasetError("write failed for '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset '" + path + "'");

    Dataset ds;
    std::string line;
    int lineno = 0;
    bool saw_columns = false, saw_target_dim = false;

    auto fail = [&](const std::string& why) -> void {
        throw DatasetError(path + ":" + std::to_string(lineno) + ": " + why);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        if (line[0] == '#') {
            auto colon = line.find(':');
            if (colon == std::string::npos) continue;  // plain comment
            std::string key = line.substr(1, colon - 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            std::string val = line.substr(colon + 1);
            val.erase(0, val.find_first_not_of(' '));

            if (key == "name") ds.name = val;
            else if (key == "columns") {
                ds.columns = split_csv(val);
                saw_columns = true;
            } else if (key == "dims") {
                for (const auto& tok : split_csv(val)) {
                    try {
                        ds.dims.push_back(std::stoi(tok));
                    } catch (const std::exception&) {
                        fail("non-integer dimension '" + tok + "'");
                    }
                }
            } else if (key == "target") ds.target_name = val;
            else if (key == "target_dim") {
                try {
                    ds.target_dim = std::stoi(val);
                } catch (const std::exception&) {
                    fail("non-integer target_dim '" + val + "'");
                }
                saw_target_dim = true;
            } else if (key == "seed") ds.seed = std::strtoull(val.c_str(), nullptr, 10);
            else if (key == "params") ds.params = val;
            continue;
        }

        if (!saw_columns) fail("data row before '# columns:' header");
        auto cells = split_csv(line);
        if (cells.size() != ds.columns.size() + 1)
            fail("expected " + std::to_string(ds.columns.size() + 1) + " cells, got " +
                 std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const char* begin = cells[j].c_str();
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin || *end != '\0')
                fail("non-numeric cell '" + cells[j] + "' in column " + std::to_string(j + 1));
            row.push_back(v);
        }
        double target = row.back();
        row.pop_back();
        ds.push_row(row, target);
    }

    if (!saw_columns) throw DatasetError(path + ": missing '# columns:' header");
    if (!saw_target_dim) ds.target_dim = 0;
    ds.check_rectangular();
    return ds;
}

}  // namespace sr
