#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "phishguard/dataset.hpp"
#include "phishguard/features.hpp"

using namespace phishguard;
using namespace phishguard::dataset;

namespace {

// A tiny valid CSV built from the canonical header with the given rows.
std::string tiny_csv(const std::vector<std::string>& rows) {
    std::ostringstream os;
    os << features::csv_header() << "\n";
    for (const auto& row : rows) os << row << "\n";
    return os.str();
}

std::string zeros_row(long id, int label) {
    std::ostringstream os;
    os << id;
    for (std::size_t i = 0; i < features::kFeatureCount; ++i) os << ",0";
    os << "," << label;
    return os.str();
}

std::string write_temp(const std::string& text, const std::string& name) {
    const std::string path = "/tmp/pg_dataset_" + name + ".csv";
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("parse_csv_text loads rows and reorders columns by name") {
    const auto table = parse_csv_text(tiny_csv({zeros_row(1, 0), zeros_row(2, 1)}), "t");
    CHECK(table.rows() == 2);
    CHECK(table.labels == std::vector<int>{0, 1});
    CHECK(table.ids == std::vector<long>{1, 2});
    CHECK(table.feature_names == features::schema());

    // Same data with two columns swapped in the header parses identically.
    std::string header = features::csv_header();
    const std::string a = "NumDots", b = "SubdomainLevel";
    std::string swapped = header;
    swapped.replace(swapped.find(a), a.size(), "@");
    swapped.replace(swapped.find(b), b.size(), a);
    swapped.replace(swapped.find('@'), 1, b);
    std::ostringstream os;
    os << swapped << "\n" << "7,5,3";
    for (std::size_t i = 2; i < features::kFeatureCount; ++i) os << ",0";
    os << ",1\n";
    const auto reordered = parse_csv_text(os.str(), "t");
    // Header columns were (SubdomainLevel, NumDots) = (5, 3); canonical
    // order must come back as NumDots=3, SubdomainLevel=5.
    CHECK(reordered.features(0, 0) == 3.0);
    CHECK(reordered.features(0, 1) == 5.0);
}

TEST_CASE("missing or extra header columns raise a schema error naming them") {
    std::string header = features::csv_header();
    const std::string no_label = header.substr(0, header.rfind(",CLASS_LABEL"));
    CHECK_THROWS_AS(parse_csv_text(no_label + "\n", "t"), SchemaError);
    try {
        parse_csv_text(header + ",Bogus\n", "t");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("Bogus") != std::string::npos);
    }
    try {
        std::string missing = header;
        missing.replace(missing.find("NumDash,"), 8, "");
        parse_csv_text(missing + "\n", "t");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("NumDash") != std::string::npos);
    }
}

TEST_CASE("non-numeric cells raise a parse error with coordinates") {
    std::string bad = zeros_row(1, 0);
    bad.replace(bad.find(",0"), 2, ",abc");
    try {
        parse_csv_text(tiny_csv({bad}), "t");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("abc") != std::string::npos);
        CHECK(msg.find("row 1") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
}

TEST_CASE("labels outside {0,1} are rejected") {
    CHECK_THROWS_AS(parse_csv_text(tiny_csv({zeros_row(1, 2)}), "t"), ParseError);
}

TEST_CASE("missing_report counts blank and non-finite cells per column") {
    std::string blank = zeros_row(1, 0);
    // Blank out the first feature cell (after the id).
    blank.replace(blank.find(",0"), 2, ",");
    const auto path = write_temp(tiny_csv({blank, zeros_row(2, 1)}), "missing");
    const auto report = missing_report(path);
    CHECK(report.at("NumDots") == 1);
    CHECK(report.at("SubdomainLevel") == 0);
    CHECK(report.at("CLASS_LABEL") == 0);
    std::remove(path.c_str());

    const auto clean_path = write_temp(tiny_csv({zeros_row(1, 0)}), "clean");
    for (const auto& [name, count] : missing_report(clean_path)) CHECK(count == 0);
    std::remove(clean_path.c_str());

    const auto empty_path = write_temp(features::csv_header() + "\n", "empty");
    for (const auto& [name, count] : missing_report(empty_path)) CHECK(count == 0);
    std::remove(empty_path.c_str());
}

TEST_CASE("synthesized table is balanced and round-trips through CSV") {
    const auto table = synthesize(200, 11);
    CHECK(table.rows() == 200);
    std::size_t ones = 0;
    for (int y : table.labels) ones += static_cast<std::size_t>(y);
    CHECK(ones == 100);
    CHECK(synthesize(200, 11).features.data()[37] == table.features.data()[37]);

    const std::string path = "/tmp/pg_dataset_roundtrip.csv";
    write_csv(table, path);
    const auto loaded = load_csv(path);
    REQUIRE(loaded.rows() == table.rows());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        CHECK(loaded.labels[r] == table.labels[r]);
        for (std::size_t c = 0; c < features::kFeatureCount; ++c) {
            CHECK(loaded.features(r, c) == doctest::Approx(table.features(r, c)).epsilon(1e-9));
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("stratified split yields per-class ratio cut and partitions the rows") {
    const auto table = synthesize(1000, 3);
    const auto s = split(table, 0.7, 42);
    CHECK(s.train_x.rows() == 700);
    CHECK(s.test_x.rows() == 300);
    std::size_t train_ones = 0;
    for (int y : s.train_y) train_ones += static_cast<std::size_t>(y);
    CHECK(train_ones == 350);

    std::set<std::size_t> seen;
    for (std::size_t r : s.train_rows) seen.insert(r);
    for (std::size_t r : s.test_rows) seen.insert(r);
    CHECK(seen.size() == 1000);
    CHECK(*seen.rbegin() == 999);
}

TEST_CASE("same seed gives identical splits, different seed differs") {
    const auto table = synthesize(300, 5);
    const auto a = split(table, 0.7, 9);
    const auto b = split(table, 0.7, 9);
    CHECK(a.train_rows == b.train_rows);
    CHECK(a.test_rows == b.test_rows);
    CHECK(content_hash(a) == content_hash(b));
    const auto c = split(table, 0.7, 10);
    CHECK(content_hash(c) != content_hash(a));
}

TEST_CASE("split rejects bad ratios and starving classes") {
    const auto table = synthesize(100, 1);
    CHECK_THROWS_AS(split(table, 0.0, 1), ParamError);
    CHECK_THROWS_AS(split(table, 1.0, 1), ParamError);

    RawTable tiny;
    tiny.feature_names = features::schema();
    tiny.features = Matrix(3, features::kFeatureCount);
    tiny.labels = {0, 0, 1};
    tiny.ids = {1, 2, 3};
    CHECK_THROWS_AS(split(tiny, 0.7, 1, true), InputError);
}

TEST_CASE("standard scaler matches the analytic z-scores of {1,2,3}") {
    Matrix x(3, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 2.0;
    x(2, 0) = 3.0;
    const auto stats = fit_scaler(x, ScalerMode::Standard);
    const auto z = apply_scaler(stats, x);
    CHECK(z(0, 0) == doctest::Approx(-1.224744871).epsilon(1e-8));
    CHECK(z(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(z(2, 0) == doctest::Approx(1.224744871).epsilon(1e-8));
}

TEST_CASE("scaled train columns have mean 0 and unit variance") {
    const auto table = synthesize(400, 8);
    const auto s = split(table, 0.7, 2);
    const auto z = apply_scaler(s.scaler, s.train_x);
    for (std::size_t c = 0; c < z.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < z.rows(); ++r) mean += z(r, c);
        mean /= static_cast<double>(z.rows());
        CHECK(std::abs(mean) < 1e-9);
        // Constant columns are floored, not unit variance; skip them.
        if (s.scaler.spread[c] <= 1e-12) continue;
        double var = 0.0;
        for (std::size_t r = 0; r < z.rows(); ++r) var += (z(r, c) - mean) * (z(r, c) - mean);
        var /= static_cast<double>(z.rows());
        CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("constant features transform to all zeros") {
    Matrix x(4, 1);
    for (std::size_t r = 0; r < 4; ++r) x(r, 0) = 7.5;
    const auto z = apply_scaler(fit_scaler(x, ScalerMode::Standard), x);
    for (std::size_t r = 0; r < 4; ++r) CHECK(z(r, 0) == 0.0);
}

TEST_CASE("apply then invert is identity within 1e-9") {
    const auto table = synthesize(50, 4);
    for (ScalerMode mode : {ScalerMode::Standard, ScalerMode::MinMax, ScalerMode::None}) {
        const auto stats = fit_scaler(table.features, mode);
        const auto back = invert_scaler(stats, apply_scaler(stats, table.features));
        for (std::size_t i = 0; i < table.features.size(); ++i) {
            CHECK(back.data()[i] == doctest::Approx(table.features.data()[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("minmax scaler maps train columns into [0,1]") {
    const auto table = synthesize(100, 6);
    const auto stats = fit_scaler(table.features, ScalerMode::MinMax);
    const auto z = apply_scaler(stats, table.features);
    for (std::size_t i = 0; i < z.size(); ++i) {
        CHECK(z.data()[i] >= -1e-12);
        CHECK(z.data()[i] <= 1.0 + 1e-12);
    }
}

TEST_CASE("scaler statistics ignore test rows entirely") {
    const auto table = synthesize(200, 9);
    auto s = split(table, 0.7, 13);
    const auto before = s.scaler;
    // Perturb every test row, then refit from the train rows only.
    for (std::size_t i = 0; i < s.test_x.size(); ++i) s.test_x.data()[i] += 1234.5;
    const auto after = fit_scaler(s.train_x, ScalerMode::Standard);
    REQUIRE(before.center.size() == after.center.size());
    for (std::size_t c = 0; c < before.center.size(); ++c) {
        CHECK(before.center[c] == after.center[c]);
        CHECK(before.spread[c] == after.spread[c]);
    }
}
