#include "phishguard/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace phishguard::eval {

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw InputError("confusion: prediction/label length mismatch (" +
                         std::to_string(predictions.size()) + " vs " +
                         std::to_string(labels.size()) + ")");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if ((predictions[i] != 0 && predictions[i] != 1) || (labels[i] != 0 && labels[i] != 1)) {
            throw InputError("confusion: entries must be 0 or 1");
        }
        if (labels[i] == 1) {
            predictions[i] == 1 ? ++cm.tp : ++cm.fn;
        } else {
            predictions[i] == 1 ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

MetricSet metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw InputError("metrics: empty confusion matrix");
    MetricSet m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp > 0) {
        m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    } else {
        m.degenerate = true;
    }
    if (cm.tp + cm.fn > 0) {
        m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    } else {
        m.degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.degenerate = true;
    }
    return m;
}

ComparisonTable compare(const std::vector<models::ClassifierSpec>& specs,
                        const dataset::SplitDataset& split) {
    std::vector<models::TrainedModel> unused;
    return compare_collect(specs, split, unused);
}

ComparisonTable compare_collect(const std::vector<models::ClassifierSpec>& specs,
                                const dataset::SplitDataset& split,
                                std::vector<models::TrainedModel>& out_models) {
    if (specs.empty()) throw InputError("compare: need at least one spec");
    ComparisonTable table;
    out_models.clear();
    for (const auto& spec : specs) {
        ComparisonRow row;
        row.name = models::kind_name(spec.kind);
        row.seed = spec.seed;
        try {
            models::TrainedModel model = models::fit(spec, split.train_x, split.train_y);
            Matrix proba = models::predict_proba_batch(model, split.test_x);
            std::vector<int> predictions(proba.rows());
            for (std::size_t i = 0; i < proba.rows(); ++i) {
                predictions[i] = proba(i, 0) >= 0.5 ? 1 : 0;
            }
            row.cm = confusion(predictions, split.test_y);
            row.metric_set = metrics(row.cm);
            row.train_seconds = model.train_seconds;
            out_models.push_back(std::move(model));
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string render_markdown(const ComparisonTable& table) {
    std::ostringstream os;
    os << "| model | accuracy | precision | recall | f1 |\n";
    os << "|-------|----------|-----------|--------|----|\n";
    for (const auto& row : table.rows) {
        if (row.failed) {
            os << "| " << row.name << " | failed | failed | failed | failed |\n";
        } else {
            os << "| " << row.name << " | " << fmt(row.metric_set.accuracy) << " | "
               << fmt(row.metric_set.precision) << " | " << fmt(row.metric_set.recall) << " | "
               << fmt(row.metric_set.f1) << " |\n";
        }
    }
    return os.str();
}

std::string render_csv(const ComparisonTable& table) {
    std::ostringstream os;
    os << "model,accuracy,precision,recall,f1,train_seconds,seed,status\n";
    for (const auto& row : table.rows) {
        if (row.failed) {
            os << row.name << ",,,,,," << row.seed << ",failed\n";
        } else {
            // Train time is wall clock and not deterministic; report it
            // rounded away for byte-stable output.
            os << row.name << "," << fmt(row.metric_set.accuracy) << ","
               << fmt(row.metric_set.precision) << "," << fmt(row.metric_set.recall) << ","
               << fmt(row.metric_set.f1) << ",-," << row.seed << ",ok\n";
        }
    }
    return os.str();
}

std::string render_svg(const ComparisonTable& table) {
    std::vector<const ComparisonRow*> rows;
    for (const auto& row : table.rows) {
        if (!row.failed) rows.push_back(&row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        return a->metric_set.accuracy > b->metric_set.accuracy;
    });
    const int bar_h = 24, gap = 8, left = 160, width = 640;
    const int height = static_cast<int>(rows.size()) * (bar_h + gap) + gap;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\">\n";
    int y = gap;
    for (const auto* row : rows) {
        const int bar = static_cast<int>(row->metric_set.accuracy * (width - left - 60));
        os << "  <text x=\"4\" y=\"" << y + bar_h - 7 << "\" font-size=\"13\">" << row->name
           << "</text>\n";
        os << "  <rect x=\"" << left << "\" y=\"" << y << "\" width=\"" << bar << "\" height=\""
           << bar_h << "\" fill=\"#4477aa\"/>\n";
        os << "  <text x=\"" << left + bar + 6 << "\" y=\"" << y + bar_h - 7
           << "\" font-size=\"13\">" << fmt(row->metric_set.accuracy) << "</text>\n";
        y += bar_h + gap;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace

ReportFormat report_format_from_name(const std::string& name) {
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "svg" || name == "svg-bar-chart") return ReportFormat::SvgBarChart;
    throw ParamError("unknown report format: " + name);
}

std::string render_report(const ComparisonTable& table, ReportFormat format) {
    if (table.rows.empty()) throw InputError("render_report: empty table");
    switch (format) {
        case ReportFormat::Markdown: return render_markdown(table);
        case ReportFormat::Csv: return render_csv(table);
        case ReportFormat::SvgBarChart: return render_svg(table);
    }
    throw ParamError("unknown report format");
}

std::string render_confusion_csv(const ConfusionMatrix& cm) {
    std::ostringstream os;
    os << ",pred_1,pred_0\n";
    os << "actual_1," << cm.tp << "," << cm.fn << "\n";
    os << "actual_0," << cm.fp << "," << cm.tn << "\n";
    return os.str();
}

void write_reports(const ComparisonTable& table, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::binary);
        if (!out) throw InputError("cannot write " + name + " in " + out_dir);
        out << content;
    };
    write("comparison.md", render_report(table, ReportFormat::Markdown));
    write("comparison.csv", render_report(table, ReportFormat::Csv));
    write("accuracy.svg", render_report(table, ReportFormat::SvgBarChart));
    for (const auto& row : table.rows) {
        if (!row.failed) write("confusion_" + row.name + ".csv", render_confusion_csv(row.cm));
    }
}

}  // namespace phishguard::eval
