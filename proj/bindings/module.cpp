#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phishguard/dataset.hpp"
#include "phishguard/eval.hpp"
#include "phishguard/features.hpp"
#include "phishguard/models.hpp"

namespace py = pybind11;
using namespace phishguard;

namespace {

py::dict feature_dict(const features::FeatureVector& fv) {
    py::dict out;
    const auto& names = features::schema();
    for (std::size_t i = 0; i < names.size(); ++i) out[names[i].c_str()] = fv.values[i];
    return out;
}

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InputError("need at least one row");
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw ShapeError("ragged row list");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

// Thin handle so Python callers can load, inspect and score saved models.
struct Model {
    models::TrainedModel inner;

    std::string kind() const { return models::kind_name(inner.spec.kind); }
    double predict_proba(const std::vector<double>& row) const {
        return models::predict_proba(inner, row);
    }
    int predict(const std::vector<double>& row) const { return models::predict(inner, row); }
    double score_url(const std::string& url, const std::optional<std::string>& html) const {
        const auto fv = features::extract(url, html);
        return models::predict_proba(inner, {fv.values.begin(), fv.values.end()});
    }
    void save(const std::string& path) const { models::save_model(inner, path); }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "phishing-website detection workbench core";

    m.def("schema", [] { return features::schema(); },
          "Ordered names of the 48 features.");
    m.def("schema_fingerprint", &features::schema_fingerprint);

    m.def(
        "extract_features",
        [](const std::string& url, const std::optional<std::string>& html) {
            return feature_dict(features::extract(url, html));
        },
        py::arg("url"), py::arg("html") = py::none(),
        "Extract the 48-feature representation of a URL (content features "
        "need the html text).");

    m.def(
        "metrics",
        [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
            const auto ms = eval::metrics(eval::ConfusionMatrix{tp, fp, fn, tn});
            py::dict out;
            out["accuracy"] = ms.accuracy;
            out["precision"] = ms.precision;
            out["recall"] = ms.recall;
            out["f1"] = ms.f1;
            out["degenerate"] = ms.degenerate;
            return out;
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

    m.def(
        "synthesize_csv",
        [](const std::string& path, std::size_t rows, std::uint64_t seed) {
            dataset::write_csv(dataset::synthesize(rows, seed), path);
        },
        py::arg("path"), py::arg("rows") = 10000, py::arg("seed") = 42,
        "Write a deterministic synthetic dataset in the canonical schema.");

    py::class_<Model>(m, "Model")
        .def_property_readonly("kind", &Model::kind)
        .def("predict_proba", &Model::predict_proba, py::arg("row"))
        .def("predict", &Model::predict, py::arg("row"))
        .def("score_url", &Model::score_url, py::arg("url"), py::arg("html") = py::none())
        .def("save", &Model::save, py::arg("path"));

    m.def(
        "train",
        [](const std::string& kind, const std::vector<std::vector<double>>& rows,
           const std::vector<int>& labels, std::uint64_t seed) {
            auto spec = models::default_spec(models::kind_from_name(kind));
            spec.seed = seed;
            return Model{models::fit(spec, matrix_from_rows(rows), labels)};
        },
        py::arg("kind"), py::arg("rows"), py::arg("labels"), py::arg("seed") = 0,
        "Fit one classifier on raw 48-column feature rows.");

    m.def(
        "train_on_csv",
        [](const std::string& kind, const std::string& csv_path, double ratio,
           std::uint64_t seed) {
            const auto table = dataset::load_csv(csv_path);
            const auto split = dataset::split(table, ratio, seed);
            auto spec = models::default_spec(models::kind_from_name(kind));
            spec.seed = seed;
            Model model{models::fit(spec, split.train_x, split.train_y)};
            const auto proba = models::predict_proba_batch(model.inner, split.test_x);
            std::vector<int> predictions(proba.rows());
            for (std::size_t i = 0; i < proba.rows(); ++i) {
                predictions[i] = proba(i, 0) >= 0.5 ? 1 : 0;
            }
            const auto ms = eval::metrics(eval::confusion(predictions, split.test_y));
            return py::make_tuple(model, ms.accuracy);
        },
        py::arg("kind"), py::arg("csv_path"), py::arg("ratio") = 0.7, py::arg("seed") = 42,
        "Train on a CSV with a stratified split; returns (model, test accuracy).");

    m.def("load_model", [](const std::string& path) { return Model{models::load_model(path)}; },
          py::arg("path"));

    py::register_exception<SchemaError>(m, "SchemaError");
    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<FormatError>(m, "FormatError");
}
