#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phishguard/matrix.hpp"

namespace phishguard::dataset {

struct RawTable {
    std::vector<std::string> feature_names;  // canonical order, 48 entries
    Matrix features;                         // rows x 48
    std::vector<int> labels;                 // 0/1 per row
    std::vector<long> ids;

    std::size_t rows() const { return features.rows(); }
};

// Parses the CSV and validates the header against the canonical schema
// (order-insensitive, name-exact). Columns are re-ordered to schema order.
RawTable load_csv(const std::string& path);
RawTable parse_csv_text(const std::string& text, const std::string& origin);

// Per-column missing/NaN counts (blank cells and non-finite values).
std::map<std::string, std::size_t> missing_report(const std::string& path);

enum class ScalerMode { Standard, MinMax, None };

struct ScalerStats {
    ScalerMode mode = ScalerMode::Standard;
    std::vector<double> center;  // mean (standard) or min (minmax); empty for None
    std::vector<double> spread;  // std (standard) or max-min (minmax), floored at 1e-12
};

ScalerStats fit_scaler(const Matrix& train, ScalerMode mode);
Matrix apply_scaler(const ScalerStats& stats, const Matrix& features);
Matrix invert_scaler(const ScalerStats& stats, const Matrix& features);

struct SplitDataset {
    Matrix train_x;
    std::vector<int> train_y;
    Matrix test_x;
    std::vector<int> test_y;
    std::uint64_t seed = 0;
    double ratio = 0.7;
    bool stratified = true;
    ScalerStats scaler;  // fitted on train only, Standard by default
    std::vector<std::size_t> train_rows;  // original row indices
    std::vector<std::size_t> test_rows;
};

// Seeded shuffle within each class, then a per-class ratio cut
// (stratified), or a plain shuffled cut when stratified is false.
SplitDataset split(const RawTable& table, double ratio, std::uint64_t seed,
                   bool stratified = true, ScalerMode scaling = ScalerMode::Standard);

// FNV-1a over the split content; reproducibility log line material.
std::uint64_t content_hash(const SplitDataset& s);

// Deterministic stand-in for the published 10,000-row corpus: balanced
// classes, canonical schema, class-conditional feature distributions with
// deliberate overlap. Used when the published CSV is not on disk.
RawTable synthesize(std::size_t rows, std::uint64_t seed);
void write_csv(const RawTable& table, const std::string& path);

}  // namespace phishguard::dataset
