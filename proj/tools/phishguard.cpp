// phishguard: phishing-website detection workbench CLI.
//
// Subcommands: extract, preprocess, synth, train, compare, predict,
// gradcheck, serve. Exit codes: 0 success, 2 input/parse, 3 data/schema,
// 4 model/state, 5 network.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "phishguard/dataset.hpp"
#include "phishguard/eval.hpp"
#include "phishguard/features.hpp"
#include "phishguard/models.hpp"
#include "phishguard/neural.hpp"
#include "phishguard/serve.hpp"

namespace pg = phishguard;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;
constexpr int kExitNetwork = 5;

struct GlobalOptions {
    std::string data = "data/phishing_10k.csv";
    std::string out = "out";
    std::uint64_t seed = 42;
    double ratio = 0.7;
    bool stratified = true;
    std::string scaling = "standard";
    std::string models_list =
        "decision_tree,knn,naive_bayes,logistic_regression,linear_svm,ann,lstm,bilstm,ann_lstm";
    std::string config_path;
};

pg::dataset::ScalerMode scaler_mode(const std::string& name) {
    if (name == "standard") return pg::dataset::ScalerMode::Standard;
    if (name == "minmax") return pg::dataset::ScalerMode::MinMax;
    if (name == "none") return pg::dataset::ScalerMode::None;
    throw pg::ParamError("unknown scaling mode: " + name);
}

// Simple key=value config file; '#' starts a comment. Flags given on the
// command line override file values.
void apply_config_file(GlobalOptions& opts, const CLI::App& cmd) {
    if (opts.config_path.empty()) return;
    std::ifstream in(opts.config_path);
    if (!in) throw pg::InputError("cannot open config file " + opts.config_path);
    auto overridden = [&](const std::string& flag) {
        const CLI::Option* opt = cmd.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw pg::ParseError(opts.config_path + ":" + std::to_string(lineno) +
                                 ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r\n");
            if (a == std::string::npos) return std::string();
            return s.substr(a, s.find_last_not_of(" \t\r\n") - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "data" && !overridden("--data")) opts.data = value;
        else if (key == "out" && !overridden("--out")) opts.out = value;
        else if (key == "seed" && !overridden("--seed")) opts.seed = std::stoull(value);
        else if (key == "ratio" && !overridden("--ratio")) opts.ratio = std::stod(value);
        else if (key == "scaling" && !overridden("--scaling")) opts.scaling = value;
        else if (key == "models" && !overridden("--models")) opts.models_list = value;
        else if (key == "stratified" && !overridden("--stratified"))
            opts.stratified = value == "true" || value == "1";
        else if (key != "data" && key != "out" && key != "seed" && key != "ratio" &&
                 key != "scaling" && key != "models" && key != "stratified")
            throw pg::ParseError(opts.config_path + ":" + std::to_string(lineno) +
                                 ": unknown key " + key);
    }
}

void echo_resolved_config(const GlobalOptions& opts) {
    std::filesystem::create_directories(opts.out);
    std::ofstream out(std::filesystem::path(opts.out) / "resolved_config.txt");
    out << "data=" << opts.data << "\n"
        << "out=" << opts.out << "\n"
        << "seed=" << opts.seed << "\n"
        << "ratio=" << opts.ratio << "\n"
        << "stratified=" << (opts.stratified ? "true" : "false") << "\n"
        << "scaling=" << opts.scaling << "\n"
        << "models=" << opts.models_list << "\n";
}

pg::dataset::RawTable load_table(const GlobalOptions& opts) {
    if (!std::filesystem::exists(opts.data)) {
        throw pg::InputError("dataset not found: " + opts.data +
                             " (generate one with `phishguard synth`)");
    }
    return pg::dataset::load_csv(opts.data);
}

std::vector<pg::models::ClassifierSpec> build_specs(const GlobalOptions& opts) {
    std::vector<pg::models::ClassifierSpec> specs;
    std::stringstream ss(opts.models_list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        if (name.empty()) continue;
        auto spec = pg::models::default_spec(pg::models::kind_from_name(name));
        spec.seed = opts.seed;
        specs.push_back(spec);
    }
    if (specs.empty()) throw pg::ParamError("no models selected");
    return specs;
}

int cmd_extract(const std::string& url, const std::string& html_path, bool fetch,
                bool with_header) {
    std::optional<std::string> html;
    if (!html_path.empty()) {
        std::ifstream in(html_path, std::ios::binary);
        if (!in) throw pg::InputError("cannot open " + html_path);
        std::ostringstream os;
        os << in.rdbuf();
        html = os.str();
    } else if (fetch) {
        html = pg::features::fetch_page(url).html;
    }
    const auto fv = pg::features::extract(url, html);
    if (with_header) std::cout << pg::features::csv_header() << "\n";
    std::cout << pg::features::to_csv_row(fv, 0) << "\n";
    return 0;
}

int cmd_preprocess(const GlobalOptions& opts) {
    const auto table = load_table(opts);
    std::size_t positives = 0;
    for (int y : table.labels) positives += static_cast<std::size_t>(y);
    std::cout << "rows: " << table.rows() << " (phishing " << positives << ", legitimate "
              << table.rows() - positives << ")\n";

    const auto report = pg::dataset::missing_report(opts.data);
    std::size_t total_missing = 0;
    for (const auto& [name, count] : report) total_missing += count;
    std::cout << "missing cells: " << total_missing << "\n";
    for (const auto& [name, count] : report) {
        if (count > 0) std::cout << "  " << name << ": " << count << "\n";
    }

    const auto split = pg::dataset::split(table, opts.ratio, opts.seed, opts.stratified,
                                          scaler_mode(opts.scaling));
    std::cout << "train rows: " << split.train_x.rows() << "\n";
    std::cout << "test rows: " << split.test_x.rows() << "\n";
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(pg::dataset::content_hash(split)));
    std::cout << "split hash: " << hash << "\n";

    const auto ranked =
        pg::features::correlation_rank(table.features, table.labels, table.feature_names);
    echo_resolved_config(opts);
    std::ofstream corr(std::filesystem::path(opts.out) / "correlation.csv");
    corr << "feature,correlation\n";
    for (const auto& [name, r] : ranked) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", r);
        corr << name << "," << buf << "\n";
    }
    std::cout << "top correlated feature: " << ranked.front().first << "\n";
    return 0;
}

int cmd_synth(const GlobalOptions& opts, std::size_t rows) {
    const auto table = pg::dataset::synthesize(rows, opts.seed);
    std::filesystem::create_directories(
        std::filesystem::path(opts.data).parent_path().empty()
            ? "."
            : std::filesystem::path(opts.data).parent_path());
    pg::dataset::write_csv(table, opts.data);
    std::cout << "wrote " << table.rows() << " rows to " << opts.data << "\n";
    return 0;
}

int cmd_train(const GlobalOptions& opts, const std::string& model_name) {
    const auto table = load_table(opts);
    const auto split = pg::dataset::split(table, opts.ratio, opts.seed, opts.stratified,
                                          scaler_mode(opts.scaling));
    auto spec = pg::models::default_spec(pg::models::kind_from_name(model_name));
    spec.seed = opts.seed;
    if (!pg::models::is_deep(spec.kind) || spec.kind == pg::models::Kind::Knn) {
        spec.scaling = spec.kind == pg::models::Kind::Knn ? pg::dataset::ScalerMode::None
                                                          : scaler_mode(opts.scaling);
    }
    const auto model = pg::models::fit(spec, split.train_x, split.train_y);

    echo_resolved_config(opts);
    const auto model_path = std::filesystem::path(opts.out) / (model_name + ".phfg");
    pg::models::save_model(model, model_path.string());

    const auto proba = pg::models::predict_proba_batch(model, split.test_x);
    std::vector<int> predictions(proba.rows());
    for (std::size_t i = 0; i < proba.rows(); ++i) predictions[i] = proba(i, 0) >= 0.5 ? 1 : 0;
    const auto ms = pg::eval::metrics(pg::eval::confusion(predictions, split.test_y));

    std::ofstream log(std::filesystem::path(opts.out) / (model_name + "_train.log"));
    log << "model=" << model_name << "\n";
    log << "seed=" << opts.seed << "\n";
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(pg::dataset::content_hash(split)));
    log << "split_hash=" << hash << "\n";
    log << "test_accuracy=" << ms.accuracy << "\n";
    if (const auto* deep = std::get_if<pg::models::DeepModel>(&model.fitted)) {
        log << "loss_curve=";
        for (std::size_t i = 0; i < deep->loss_curve.size(); ++i) {
            log << (i ? "," : "") << deep->loss_curve[i];
        }
        log << "\n";
    }
    std::cout << "saved " << model_path.string() << " (test accuracy " << ms.accuracy << ")\n";
    return 0;
}

int cmd_compare(const GlobalOptions& opts) {
    const auto table = load_table(opts);
    auto specs = build_specs(opts);
    // Classical models follow the requested scaling mode except KNN, which
    // defaults to raw features; deep models always standardize.
    for (auto& spec : specs) {
        if (spec.kind != pg::models::Kind::Knn && !pg::models::is_deep(spec.kind)) {
            spec.scaling = scaler_mode(opts.scaling);
        }
    }
    const auto split = pg::dataset::split(table, opts.ratio, opts.seed, opts.stratified,
                                          pg::dataset::ScalerMode::Standard);
    std::vector<pg::models::TrainedModel> fitted;
    const auto result = pg::eval::compare_collect(specs, split, fitted);
    echo_resolved_config(opts);
    pg::eval::write_reports(result, opts.out);
    std::size_t model_index = 0;
    for (const auto& row : result.rows) {
        if (row.failed) continue;
        pg::models::save_model(fitted[model_index],
                               (std::filesystem::path(opts.out) / (row.name + ".phfg")).string());
        ++model_index;
    }
    std::size_t ok = 0;
    for (const auto& row : result.rows) {
        if (row.failed) {
            std::cout << row.name << ": FAILED (" << row.error << ")\n";
        } else {
            ++ok;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f", row.metric_set.accuracy);
            std::cout << row.name << ": accuracy " << buf << "\n";
        }
    }
    std::cout << "reports written to " << opts.out << "\n";
    return ok > 0 ? 0 : kExitModel;
}

int cmd_predict(const std::string& model_path, const std::string& url,
                const std::string& html_path, const std::string& row_csv) {
    const auto model = pg::models::load_model(model_path);
    std::vector<double> row;
    if (!row_csv.empty()) {
        std::stringstream ss(row_csv);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != pg::features::kFeatureCount) {
            throw pg::SchemaError("expected " + std::to_string(pg::features::kFeatureCount) +
                                  " comma-separated values, got " + std::to_string(row.size()));
        }
    } else {
        std::optional<std::string> html;
        if (!html_path.empty()) {
            std::ifstream in(html_path, std::ios::binary);
            if (!in) throw pg::InputError("cannot open " + html_path);
            std::ostringstream os;
            os << in.rdbuf();
            html = os.str();
        }
        const auto fv = pg::features::extract(url, html);
        row.assign(fv.values.begin(), fv.values.end());
    }
    const double probability = pg::models::predict_proba(model, row);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", probability);
    std::cout << "probability " << buf << "\n";
    std::cout << "label " << (probability >= 0.5 ? 1 : 0) << "\n";
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    using namespace pg;
    bool ok = true;
    auto report = [&](const char* name, double err) {
        std::cout << name << ": max relative error " << err << (err < 1e-4 ? " (ok)" : " (FAIL)")
                  << "\n";
        ok = ok && err < 1e-4;
    };
    {
        SeededRng rng(seed);
        NetworkGraph net;
        net.input_width = 8;
        net.head.push_back(make_dense_layer(8, 4, Activation::Tanh, rng));
        net.head.push_back(make_dense_layer(4, 1, Activation::Sigmoid, rng));
        Matrix x(16, 8);
        std::vector<int> y(16);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.5, 1.5);
        for (auto& label : y) label = rng.next_below(2);
        report("dense 8-4-1", grad_check(net, x, y));
    }
    {
        SeededRng rng(seed + 1);
        NetworkGraph net;
        net.input_width = 5;
        net.recurrent = LstmBranch{make_lstm_cell(1, 6, rng), std::nullopt};
        net.head.push_back(make_dense_layer(6, 1, Activation::Sigmoid, rng));
        Matrix x(8, 5);
        std::vector<int> y(8);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.5, 1.5);
        for (auto& label : y) label = rng.next_below(2);
        report("lstm hidden-6 length-5", grad_check(net, x, y));
    }
    {
        SeededRng rng(seed + 2);
        NetworkGraph net;
        net.input_width = 5;
        net.dense_branch.push_back(make_dense_layer(5, 3, Activation::Relu, rng));
        net.recurrent = LstmBranch{make_lstm_cell(1, 4, rng), make_lstm_cell(1, 4, rng)};
        net.head.push_back(make_dense_layer(11, 1, Activation::Sigmoid, rng));
        Matrix x(8, 5);
        std::vector<int> y(8);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.5, 1.5);
        for (auto& label : y) label = rng.next_below(2);
        report("hybrid dense+bilstm", grad_check(net, x, y));
    }
    return ok ? 0 : kExitModel;
}

int cmd_serve(const std::string& model_path, const std::string& host, int port) {
    auto model = pg::models::load_model(model_path);
    pg::serve::ScoringServer server(std::move(model));
    std::cout << "serving on " << host << ":" << port << "\n";
    pg::serve::ServerOptions options;
    options.host = host;
    options.port = port;
    server.run(options);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phishing-website detection workbench"};
    app.require_subcommand(1);

    GlobalOptions opts;
    std::string url, html_path, model_name = "ann_lstm", model_path, row_csv, host = "127.0.0.1";
    bool fetch = false, with_header = false;
    std::size_t synth_rows = 10000;
    int port = 8080;

    auto add_globals = [&](CLI::App* cmd) {
        cmd->add_option("--data", opts.data, "dataset CSV path");
        cmd->add_option("--out", opts.out, "output directory");
        cmd->add_option("--seed", opts.seed, "global seed");
        cmd->add_option("--ratio", opts.ratio, "train split ratio");
        cmd->add_option("--scaling", opts.scaling, "standard|minmax|none");
        cmd->add_flag("--stratified,!--no-stratified", opts.stratified, "stratified split");
        cmd->add_option("--models", opts.models_list, "comma-separated model kinds");
        cmd->add_option("--config", opts.config_path, "key=value config file");
    };

    auto* extract = app.add_subcommand("extract", "extract the 48-feature row for a URL");
    extract->add_option("url", url, "URL to analyze")->required();
    extract->add_option("--html", html_path, "local HTML file for content features");
    extract->add_flag("--fetch", fetch, "fetch the page over HTTP");
    extract->add_flag("--header", with_header, "print the CSV header first");

    auto* preprocess = app.add_subcommand("preprocess", "load, validate and split the dataset");
    add_globals(preprocess);

    auto* synth = app.add_subcommand("synth", "write a deterministic synthetic dataset");
    add_globals(synth);
    synth->add_option("--rows", synth_rows, "number of rows");

    auto* train = app.add_subcommand("train", "fit one model and save it");
    add_globals(train);
    train->add_option("--model", model_name, "classifier kind");

    auto* compare = app.add_subcommand("compare", "train and evaluate the selected models");
    add_globals(compare);

    auto* predict = app.add_subcommand("predict", "score a URL or feature row with a saved model");
    predict->add_option("--model-file", model_path, "saved .phfg model")->required();
    predict->add_option("--url", url, "URL to score");
    predict->add_option("--html", html_path, "local HTML file");
    predict->add_option("--row", row_csv, "48 comma-separated feature values");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gradcheck->add_option("--seed", opts.seed, "seed");

    auto* serve = app.add_subcommand("serve", "run the HTTP scoring endpoint");
    serve->add_option("--model-file", model_path, "saved .phfg model")->required();
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "bind port");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) return cmd_extract(url, html_path, fetch, with_header);
        CLI::App* active = app.get_subcommands().front();
        apply_config_file(opts, *active);
        if (preprocess->parsed()) return cmd_preprocess(opts);
        if (synth->parsed()) return cmd_synth(opts, synth_rows);
        if (train->parsed()) return cmd_train(opts, model_name);
        if (compare->parsed()) return cmd_compare(opts);
        if (predict->parsed()) {
            if (url.empty() && row_csv.empty()) {
                std::cerr << "predict: provide --url or --row\n";
                return kExitInput;
            }
            return cmd_predict(model_path, url, html_path, row_csv);
        }
        if (gradcheck->parsed()) return cmd_gradcheck(opts.seed);
        if (serve->parsed()) return cmd_serve(model_path, host, port);
    } catch (const pg::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const pg::ParamError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const pg::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const pg::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const pg::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const pg::StateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const pg::FetchError& e) {
        std::cerr << "error (" << e.category << "): " << e.what() << "\n";
        return kExitNetwork;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
