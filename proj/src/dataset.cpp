#include "phishguard/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phishguard/features.hpp"

namespace phishguard::dataset {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Header {
    // Column position of each schema feature, plus id/label positions.
    std::vector<std::size_t> feature_cols;
    long id_col = -1;
    std::size_t label_col = 0;
    std::size_t total_cols = 0;
};

Header validate_header(const std::vector<std::string>& cells, const std::string& origin) {
    const auto& names = features::schema();
    Header h;
    h.total_cols = cells.size();
    h.feature_cols.assign(names.size(), static_cast<std::size_t>(-1));
    long label_col = -1;
    std::vector<std::string> extras;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::string name = trim(cells[c]);
        if (name == "id") {
            h.id_col = static_cast<long>(c);
            continue;
        }
        if (name == "CLASS_LABEL" || name == "label") {
            label_col = static_cast<long>(c);
            continue;
        }
        bool matched = false;
        for (std::size_t f = 0; f < names.size(); ++f) {
            if (names[f] == name) {
                h.feature_cols[f] = c;
                matched = true;
                break;
            }
        }
        if (!matched) extras.push_back(name);
    }
    std::vector<std::string> missing;
    for (std::size_t f = 0; f < names.size(); ++f) {
        if (h.feature_cols[f] == static_cast<std::size_t>(-1)) missing.push_back(names[f]);
    }
    if (label_col < 0) missing.push_back("CLASS_LABEL");
    if (!missing.empty() || !extras.empty()) {
        std::string msg = origin + ": header mismatch;";
        if (!missing.empty()) {
            msg += " missing:";
            for (const auto& name : missing) msg += " " + name;
            msg += ";";
        }
        if (!extras.empty()) {
            msg += " unexpected:";
            for (const auto& name : extras) msg += " " + name;
        }
        throw SchemaError(msg);
    }
    h.label_col = static_cast<std::size_t>(label_col);
    return h;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& origin) {
    const std::string value = trim(cell);
    if (value.empty()) {
        return std::nan("");
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParseError(origin + ": non-numeric cell \"" + value + "\" at row " +
                         std::to_string(row) + ", column " + std::to_string(col));
    }
}

}  // namespace

RawTable parse_csv_text(const std::string& text, const std::string& origin) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw InputError(origin + ": empty file");
    const Header header = validate_header(split_line(trim(line)), origin);

    RawTable table;
    table.feature_names = features::schema();
    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(ss, line)) {
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        ++row;
        const auto cells = split_line(trimmed);
        if (cells.size() != header.total_cols) {
            throw ParseError(origin + ": row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.total_cols));
        }
        for (std::size_t f = 0; f < header.feature_cols.size(); ++f) {
            values.push_back(parse_cell(cells[header.feature_cols[f]], row,
                                        header.feature_cols[f], origin));
        }
        const double label = parse_cell(cells[header.label_col], row, header.label_col, origin);
        if (label != 0.0 && label != 1.0) {
            throw ParseError(origin + ": label must be 0 or 1 at row " + std::to_string(row));
        }
        table.labels.push_back(static_cast<int>(label));
        if (header.id_col >= 0) {
            table.ids.push_back(static_cast<long>(parse_cell(
                cells[static_cast<std::size_t>(header.id_col)], row,
                static_cast<std::size_t>(header.id_col), origin)));
        } else {
            table.ids.push_back(static_cast<long>(row));
        }
    }
    table.features = Matrix(table.labels.size(), features::kFeatureCount, std::move(values));
    return table;
}

RawTable load_csv(const std::string& path) { return parse_csv_text(read_file(path), path); }

std::map<std::string, std::size_t> missing_report(const std::string& path) {
    const std::string text = read_file(path);
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw InputError(path + ": empty file");
    const auto header_cells = split_line(trim(line));
    std::map<std::string, std::size_t> report;
    std::vector<std::string> names;
    for (const auto& cell : header_cells) {
        names.push_back(trim(cell));
        report[names.back()] = 0;
    }
    while (std::getline(ss, line)) {
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto cells = split_line(trimmed);
        for (std::size_t c = 0; c < cells.size() && c < names.size(); ++c) {
            const std::string value = trim(cells[c]);
            bool missing = value.empty();
            if (!missing) {
                try {
                    const double v = std::stod(value);
                    missing = !std::isfinite(v);
                } catch (const std::exception&) {
                    missing = true;
                }
            }
            if (missing) ++report[names[c]];
        }
    }
    return report;
}

ScalerStats fit_scaler(const Matrix& train, ScalerMode mode) {
    if (train.rows() == 0) throw InputError("fit_scaler: empty training set");
    ScalerStats stats;
    stats.mode = mode;
    if (mode == ScalerMode::None) return stats;
    const std::size_t cols = train.cols();
    stats.center.resize(cols);
    stats.spread.resize(cols);
    const double n = static_cast<double>(train.rows());
    for (std::size_t c = 0; c < cols; ++c) {
        if (mode == ScalerMode::Standard) {
            double mean = 0.0;
            for (std::size_t r = 0; r < train.rows(); ++r) mean += train(r, c);
            mean /= n;
            double var = 0.0;
            for (std::size_t r = 0; r < train.rows(); ++r) {
                const double d = train(r, c) - mean;
                var += d * d;
            }
            stats.center[c] = mean;
            stats.spread[c] = std::max(1e-12, std::sqrt(var / n));
        } else {
            double lo = train(0, c), hi = train(0, c);
            for (std::size_t r = 1; r < train.rows(); ++r) {
                lo = std::min(lo, train(r, c));
                hi = std::max(hi, train(r, c));
            }
            stats.center[c] = lo;
            stats.spread[c] = std::max(1e-12, hi - lo);
        }
    }
    return stats;
}

Matrix apply_scaler(const ScalerStats& stats, const Matrix& features) {
    if (stats.mode == ScalerMode::None) return features;
    if (features.cols() != stats.center.size()) {
        throw ShapeError("apply_scaler: column count mismatch");
    }
    Matrix out = features;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            out(r, c) = (out(r, c) - stats.center[c]) / stats.spread[c];
        }
    }
    return out;
}

Matrix invert_scaler(const ScalerStats& stats, const Matrix& features) {
    if (stats.mode == ScalerMode::None) return features;
    Matrix out = features;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            out(r, c) = out(r, c) * stats.spread[c] + stats.center[c];
        }
    }
    return out;
}

SplitDataset split(const RawTable& table, double ratio, std::uint64_t seed, bool stratified,
                   ScalerMode scaling) {
    if (ratio <= 0.0 || ratio >= 1.0) throw ParamError("split: ratio must be in (0,1)");
    SplitDataset out;
    out.seed = seed;
    out.ratio = ratio;
    out.stratified = stratified;

    SeededRng rng(seed);
    std::vector<std::size_t> train_rows, test_rows;
    if (stratified) {
        for (int cls : {0, 1}) {
            std::vector<std::size_t> rows;
            for (std::size_t r = 0; r < table.rows(); ++r) {
                if (table.labels[r] == cls) rows.push_back(r);
            }
            if (rows.size() < 2) {
                throw InputError("split: class " + std::to_string(cls) +
                                 " has fewer than 2 rows under stratification");
            }
            shuffle_indices(rows, rng);
            const std::size_t n_train =
                static_cast<std::size_t>(std::lround(ratio * static_cast<double>(rows.size())));
            train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + n_train);
            test_rows.insert(test_rows.end(), rows.begin() + n_train, rows.end());
        }
    } else {
        std::vector<std::size_t> rows(table.rows());
        for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
        shuffle_indices(rows, rng);
        const std::size_t n_train =
            static_cast<std::size_t>(std::lround(ratio * static_cast<double>(rows.size())));
        train_rows.assign(rows.begin(), rows.begin() + n_train);
        test_rows.assign(rows.begin() + n_train, rows.end());
    }

    auto gather = [&](const std::vector<std::size_t>& rows, Matrix& x, std::vector<int>& y) {
        x = Matrix(rows.size(), table.features.cols());
        y.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t c = 0; c < table.features.cols(); ++c) {
                x(i, c) = table.features(rows[i], c);
            }
            y[i] = table.labels[rows[i]];
        }
    };
    gather(train_rows, out.train_x, out.train_y);
    gather(test_rows, out.test_x, out.test_y);
    out.train_rows = std::move(train_rows);
    out.test_rows = std::move(test_rows);
    out.scaler = fit_scaler(out.train_x, scaling);
    return out;
}

std::uint64_t content_hash(const SplitDataset& s) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    auto mix_matrix = [&](const Matrix& m) {
        mix_bytes(m.data(), m.size() * sizeof(double));
    };
    mix_matrix(s.train_x);
    mix_matrix(s.test_x);
    mix_bytes(s.train_y.data(), s.train_y.size() * sizeof(int));
    mix_bytes(s.test_y.data(), s.test_y.size() * sizeof(int));
    return h;
}

void write_csv(const RawTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << features::csv_header() << "\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out << table.ids[r];
        for (std::size_t c = 0; c < table.features.cols(); ++c) {
            const double v = table.features(r, c);
            out << ",";
            if (v == std::floor(v) && std::abs(v) < 1e15) {
                out << static_cast<long long>(v);
            } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.10g", v);
                out << buf;
            }
        }
        out << "," << table.labels[r] << "\n";
    }
}

}  // namespace phishguard::dataset
