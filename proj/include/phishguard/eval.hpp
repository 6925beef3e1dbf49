#pragma once

#include <string>
#include <vector>

#include "phishguard/dataset.hpp"
#include "phishguard/models.hpp"

namespace phishguard::eval {

// Positive class = phishing = 1 everywhere.
struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels);

struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when a zero denominator forced a metric to 0.
    bool degenerate = false;
};

MetricSet metrics(const ConfusionMatrix& cm);

struct ComparisonRow {
    std::string name;
    bool failed = false;
    std::string error;
    MetricSet metric_set;
    ConfusionMatrix cm;
    double train_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

// Fits each spec on the split's training rows (each model applies its own
// scaling mode) and evaluates on the test rows. An individual model failure
// marks its row failed and the run continues.
ComparisonTable compare(const std::vector<models::ClassifierSpec>& specs,
                        const dataset::SplitDataset& split);

// Like compare, but also returns each fitted model (same order as specs;
// failed rows carry no model).
ComparisonTable compare_collect(const std::vector<models::ClassifierSpec>& specs,
                                const dataset::SplitDataset& split,
                                std::vector<models::TrainedModel>& out_models);

enum class ReportFormat { Markdown, Csv, SvgBarChart };
ReportFormat report_format_from_name(const std::string& name);  // throws ParamError

// Markdown and CSV renderings are byte-deterministic; the SVG is a bar
// chart of accuracies sorted descending.
std::string render_report(const ComparisonTable& table, ReportFormat format);
std::string render_confusion_csv(const ConfusionMatrix& cm);

// Emits comparison.md, comparison.csv, accuracy.svg and per-model
// confusion_<name>.csv into out_dir.
void write_reports(const ComparisonTable& table, const std::string& out_dir);

}  // namespace phishguard::eval
