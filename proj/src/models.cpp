#include "phishguard/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "phishguard/features.hpp"

namespace phishguard::models {

namespace {

struct KindInfo {
    Kind kind;
    const char* name;
};

const KindInfo kKinds[] = {
    {Kind::DecisionTree, "decision_tree"},
    {Kind::Knn, "knn"},
    {Kind::NaiveBayes, "naive_bayes"},
    {Kind::LogisticRegression, "logistic_regression"},
    {Kind::LinearSvm, "linear_svm"},
    {Kind::Ann, "ann"},
    {Kind::Lstm, "lstm"},
    {Kind::Bilstm, "bilstm"},
    {Kind::AnnLstm, "ann_lstm"},
};

}  // namespace

const std::vector<Kind>& all_kinds() {
    static const std::vector<Kind> kinds = [] {
        std::vector<Kind> v;
        for (const auto& info : kKinds) v.push_back(info.kind);
        return v;
    }();
    return kinds;
}

std::string kind_name(Kind kind) {
    for (const auto& info : kKinds) {
        if (info.kind == kind) return info.name;
    }
    throw ParamError("unknown classifier kind");
}

Kind kind_from_name(const std::string& name) {
    for (const auto& info : kKinds) {
        if (name == info.name) return info.kind;
    }
    throw ParamError("unknown classifier kind: " + name);
}

bool is_deep(Kind kind) {
    return kind == Kind::Ann || kind == Kind::Lstm || kind == Kind::Bilstm ||
           kind == Kind::AnnLstm;
}

void ClassifierSpec::validate() const {
    switch (kind) {
        case Kind::DecisionTree:
            if (tree.max_depth < 1) throw ParamError("decision_tree: max_depth must be >= 1");
            if (tree.min_leaf < 1) throw ParamError("decision_tree: min_leaf must be >= 1");
            break;
        case Kind::Knn:
            if (knn.k < 1) throw ParamError("knn: k must be >= 1");
            break;
        case Kind::NaiveBayes:
            if (nb.variance_floor <= 0) throw ParamError("naive_bayes: variance_floor must be > 0");
            break;
        case Kind::LogisticRegression:
        case Kind::LinearSvm:
            if (linear.learning_rate <= 0) throw ParamError("linear: learning_rate must be > 0");
            if (linear.l2 < 0) throw ParamError("linear: l2 must be >= 0");
            break;
        default:
            deep.train.validate();
            if (deep.head_widths.empty() || deep.head_widths.back() != 1) {
                throw ParamError("deep: head must end in a single unit");
            }
    }
}

ClassifierSpec default_spec(Kind kind) {
    switch (kind) {
        case Kind::Ann: return build_ann_spec();
        case Kind::Lstm: return build_lstm_spec();
        case Kind::Bilstm: return build_bilstm_spec();
        case Kind::AnnLstm: return build_ann_lstm_spec();
        default: {
            ClassifierSpec spec;
            spec.kind = kind;
            if (kind == Kind::Knn) spec.scaling = dataset::ScalerMode::None;
            return spec;
        }
    }
}

ClassifierSpec build_ann_spec() {
    ClassifierSpec spec;
    spec.kind = Kind::Ann;
    spec.deep.head_widths = {64, 32, 1};
    spec.deep.train.epochs = 50;
    return spec;
}

ClassifierSpec build_lstm_spec() {
    ClassifierSpec spec;
    spec.kind = Kind::Lstm;
    spec.deep.lstm_hidden = 64;
    spec.deep.head_widths = {1};
    spec.deep.train.epochs = 2;
    spec.deep.train.batch_size = 64;
    return spec;
}

ClassifierSpec build_bilstm_spec() {
    ClassifierSpec spec;
    spec.kind = Kind::Bilstm;
    spec.deep.lstm_hidden = 64;
    spec.deep.bidirectional = true;
    spec.deep.head_widths = {1};
    spec.deep.train.epochs = 4;
    spec.deep.train.batch_size = 64;
    return spec;
}

ClassifierSpec build_ann_lstm_spec() {
    ClassifierSpec spec;
    spec.kind = Kind::AnnLstm;
    spec.deep.dense_widths = {64, 32};
    spec.deep.lstm_hidden = 64;
    spec.deep.head_widths = {32, 1};
    spec.deep.train.epochs = 18;
    spec.deep.train.batch_size = 32;
    return spec;
}

// ---- Decision tree (CART, Gini) -------------------------------------------

double gini_impurity(std::size_t count1, std::size_t count0) {
    const double n = static_cast<double>(count1 + count0);
    if (n == 0) return 0.0;
    const double p1 = count1 / n, p0 = count0 / n;
    return 1.0 - p1 * p1 - p0 * p0;
}

namespace {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;
};

SplitChoice best_split(const Matrix& x, const std::vector<int>& y,
                       const std::vector<std::size_t>& rows, const TreeParams& hp) {
    SplitChoice best;
    const std::size_t n = rows.size();
    std::vector<std::pair<double, int>> column(n);
    for (std::size_t f = 0; f < x.cols(); ++f) {
        for (std::size_t i = 0; i < n; ++i) column[i] = {x(rows[i], f), y[rows[i]]};
        std::sort(column.begin(), column.end());
        std::size_t left1 = 0, left0 = 0, total1 = 0, total0 = 0;
        for (const auto& [value, label] : column) (label == 1 ? total1 : total0) += 1;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            (column[i].second == 1 ? left1 : left0) += 1;
            if (column[i].first == column[i + 1].first) continue;
            const std::size_t left = i + 1, right = n - left;
            if (left < hp.min_leaf || right < hp.min_leaf) continue;
            const double weighted =
                (left * gini_impurity(left1, left0) +
                 right * gini_impurity(total1 - left1, total0 - left0)) /
                static_cast<double>(n);
            // Strict improvement keeps tie-breaks at the lowest feature
            // index / lowest threshold (iteration order).
            if (!best.found || weighted < best.impurity - 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = (column[i].first + column[i + 1].first) / 2.0;
                best.impurity = weighted;
            }
        }
    }
    return best;
}

int build_tree(const Matrix& x, const std::vector<int>& y, std::vector<std::size_t>& rows,
               std::size_t depth, const TreeParams& hp, TreeModel& tree) {
    std::size_t count1 = 0;
    for (std::size_t r : rows) count1 += static_cast<std::size_t>(y[r]);
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[index].prob = rows.empty() ? 0.0 : static_cast<double>(count1) / rows.size();

    const bool pure = count1 == 0 || count1 == rows.size();
    if (pure || depth >= hp.max_depth || rows.size() < 2 * hp.min_leaf) return index;

    const SplitChoice choice = best_split(x, y, rows, hp);
    if (!choice.found) return index;  // identical features with mixed labels

    const double parent = gini_impurity(count1, rows.size() - count1);
    if (choice.impurity >= parent - 1e-12) return index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        (x(r, choice.feature) <= choice.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[index].feature = static_cast<int>(choice.feature);
    tree.nodes[index].threshold = choice.threshold;
    const int left = build_tree(x, y, left_rows, depth + 1, hp, tree);
    tree.nodes[index].left = left;
    const int right = build_tree(x, y, right_rows, depth + 1, hp, tree);
    tree.nodes[index].right = right;
    return index;
}

}  // namespace

TreeModel fit_decision_tree(const Matrix& x, const std::vector<int>& y, const TreeParams& hp) {
    if (x.rows() == 0) throw InputError("decision_tree: empty training set");
    TreeModel tree;
    std::vector<std::size_t> rows(x.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    build_tree(x, y, rows, 0, hp, tree);
    return tree;
}

double tree_predict(const TreeModel& tree, const double* row) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        node = row[tree.nodes[node].feature] <= tree.nodes[node].threshold
                   ? tree.nodes[node].left
                   : tree.nodes[node].right;
    }
    return tree.nodes[node].prob;
}

// ---- Gaussian naive Bayes --------------------------------------------------

NbModel fit_gaussian_nb(const Matrix& x, const std::vector<int>& y, double variance_floor) {
    if (x.rows() == 0) throw InputError("naive_bayes: empty training set");
    NbModel model;
    const std::size_t cols = x.cols();
    model.mean0.assign(cols, 0.0);
    model.mean1.assign(cols, 0.0);
    model.var0.assign(cols, 0.0);
    model.var1.assign(cols, 0.0);
    std::size_t n1 = 0;
    for (int label : y) n1 += static_cast<std::size_t>(label);
    const std::size_t n0 = y.size() - n1;
    model.prior1 = static_cast<double>(n1) / y.size();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto& mean = y[r] == 1 ? model.mean1 : model.mean0;
        for (std::size_t c = 0; c < cols; ++c) mean[c] += x(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (n0 > 0) model.mean0[c] /= n0;
        if (n1 > 0) model.mean1[c] /= n1;
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto& var = y[r] == 1 ? model.var1 : model.var0;
        const auto& mean = y[r] == 1 ? model.mean1 : model.mean0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = x(r, c) - mean[c];
            var[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        model.var0[c] = std::max(variance_floor, n0 > 0 ? model.var0[c] / n0 : variance_floor);
        model.var1[c] = std::max(variance_floor, n1 > 0 ? model.var1[c] / n1 : variance_floor);
    }
    return model;
}

double nb_predict(const NbModel& model, const double* row) {
    const std::size_t cols = model.mean0.size();
    double log1 = model.prior1 > 0 ? std::log(model.prior1) : -1e30;
    double log0 = model.prior1 < 1 ? std::log(1.0 - model.prior1) : -1e30;
    for (std::size_t c = 0; c < cols; ++c) {
        const double d1 = row[c] - model.mean1[c];
        const double d0 = row[c] - model.mean0[c];
        log1 += -0.5 * (std::log(2.0 * M_PI * model.var1[c]) + d1 * d1 / model.var1[c]);
        log0 += -0.5 * (std::log(2.0 * M_PI * model.var0[c]) + d0 * d0 / model.var0[c]);
    }
    return sigmoid(log1 - log0);
}

// ---- Linear models (logistic / hinge) -------------------------------------

LinearModel fit_linear(const Matrix& x, const std::vector<int>& y, bool hinge,
                       const LinearParams& hp, std::uint64_t seed) {
    if (hp.learning_rate <= 0) throw ParamError("linear: learning_rate must be > 0");
    LinearModel model;
    model.hinge = hinge;
    model.weights.assign(x.cols(), 0.0);
    model.bias = 0.0;

    SeededRng rng(seed);
    std::vector<std::size_t> order(x.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        shuffle_indices(order, rng);
        for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
            const std::size_t end = std::min(order.size(), start + hp.batch_size);
            std::vector<double> grad(x.cols(), 0.0);
            double grad_b = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t r = order[i];
                double margin = model.bias;
                for (std::size_t c = 0; c < x.cols(); ++c) {
                    margin += model.weights[c] * x(r, c);
                }
                if (hinge) {
                    const double target = y[r] == 1 ? 1.0 : -1.0;
                    if (target * margin < 1.0) {
                        for (std::size_t c = 0; c < x.cols(); ++c) grad[c] -= target * x(r, c);
                        grad_b -= target;
                    }
                } else {
                    const double err = sigmoid(margin) - y[r];
                    for (std::size_t c = 0; c < x.cols(); ++c) grad[c] += err * x(r, c);
                    grad_b += err;
                }
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t c = 0; c < x.cols(); ++c) {
                model.weights[c] -=
                    hp.learning_rate * (grad[c] * inv + hp.l2 * model.weights[c]);
            }
            model.bias -= hp.learning_rate * grad_b * inv;
        }
    }
    return model;
}

double linear_predict(const LinearModel& model, const double* row, std::size_t cols) {
    double margin = model.bias;
    for (std::size_t c = 0; c < cols; ++c) margin += model.weights[c] * row[c];
    return sigmoid(margin);
}

// ---- KNN -------------------------------------------------------------------

double knn_predict(const KnnModel& model, const double* query, std::size_t k) {
    const std::size_t n = model.train_x.rows();
    if (k > n) {
        throw ParamError("knn: k=" + std::to_string(k) + " exceeds training size " +
                         std::to_string(n));
    }
    if (k < 1) throw ParamError("knn: k must be >= 1");
    const std::size_t cols = model.train_x.cols();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t r = 0; r < n; ++r) {
        double d2 = 0.0;
        const double* row = model.train_x.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = row[c] - query[c];
            d2 += d * d;
        }
        dist[r] = {d2, r};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
    std::size_t votes = 0;
    for (std::size_t i = 0; i < k; ++i) votes += static_cast<std::size_t>(model.train_y[dist[i].second]);
    return static_cast<double>(votes) / static_cast<double>(k);
}

// ---- Uniform contract ------------------------------------------------------

namespace {

NetworkGraph build_network(const DeepParams& deep, std::size_t input_width, SeededRng& rng) {
    NetworkGraph net;
    net.input_width = input_width;
    std::size_t width = input_width;
    for (std::size_t w : deep.dense_widths) {
        net.dense_branch.push_back(make_dense_layer(width, w, Activation::Relu, rng));
        width = w;
    }
    if (deep.lstm_hidden > 0) {
        LstmBranch branch{make_lstm_cell(1, deep.lstm_hidden, rng), std::nullopt};
        if (deep.bidirectional) branch.backward = make_lstm_cell(1, deep.lstm_hidden, rng);
        net.recurrent = std::move(branch);
    }
    width = net.merged_width();
    for (std::size_t i = 0; i < deep.head_widths.size(); ++i) {
        const bool last = i + 1 == deep.head_widths.size();
        net.head.push_back(make_dense_layer(width, deep.head_widths[i],
                                            last ? Activation::Sigmoid : Activation::Relu, rng));
        width = deep.head_widths[i];
    }
    return net;
}

}  // namespace

TrainedModel fit(const ClassifierSpec& spec, const Matrix& train_x,
                 const std::vector<int>& train_y) {
    spec.validate();
    if (train_x.rows() == 0) throw InputError("fit: empty training set");
    if (train_x.rows() != train_y.size()) throw InputError("fit: label count mismatch");

    const auto start = std::chrono::steady_clock::now();
    TrainedModel model;
    model.spec = spec;
    model.schema_fp = features::schema_fingerprint();
    model.scaler = dataset::fit_scaler(train_x, spec.scaling);
    const Matrix x = dataset::apply_scaler(model.scaler, train_x);

    bool has0 = false, has1 = false;
    for (int label : train_y) (label == 0 ? has0 : has1) = true;
    model.single_class_warning = !(has0 && has1);

    switch (spec.kind) {
        case Kind::DecisionTree:
            model.fitted = fit_decision_tree(x, train_y, spec.tree);
            break;
        case Kind::Knn:
            model.fitted = KnnModel{x, train_y};
            break;
        case Kind::NaiveBayes:
            model.fitted = fit_gaussian_nb(x, train_y, spec.nb.variance_floor);
            break;
        case Kind::LogisticRegression:
            model.fitted = fit_linear(x, train_y, false, spec.linear, spec.seed);
            break;
        case Kind::LinearSvm:
            model.fitted = fit_linear(x, train_y, true, spec.linear, spec.seed);
            break;
        default: {
            SeededRng rng(spec.seed);
            DeepModel deep;
            deep.net = build_network(spec.deep, x.cols(), rng);
            TrainConfig cfg = spec.deep.train;
            cfg.seed = spec.seed;
            TrainResult result = train_network(deep.net, x, train_y, cfg);
            deep.loss_curve = std::move(result.loss_curve);
            model.single_class_warning |= result.single_class_warning;
            model.fitted = std::move(deep);
        }
    }
    model.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return model;
}

double predict_proba(const TrainedModel& model, const std::vector<double>& row) {
    const std::size_t cols = features::kFeatureCount;
    if (row.size() != cols) {
        throw SchemaError("predict: expected " + std::to_string(cols) + " features, got " +
                          std::to_string(row.size()));
    }
    if (model.schema_fp != features::schema_fingerprint()) {
        throw SchemaError("predict: model schema fingerprint does not match this build");
    }
    Matrix x(1, cols, row);
    return predict_proba_batch(model, x)(0, 0);
}

Matrix predict_proba_batch(const TrainedModel& model, const Matrix& x_raw) {
    const Matrix x = dataset::apply_scaler(model.scaler, x_raw);
    Matrix out(x.rows(), 1);
    if (const auto* tree = std::get_if<TreeModel>(&model.fitted)) {
        if (tree->nodes.empty()) throw StateError("predict: unfitted decision tree");
        for (std::size_t r = 0; r < x.rows(); ++r) {
            out(r, 0) = tree_predict(*tree, x.data() + r * x.cols());
        }
    } else if (const auto* knn = std::get_if<KnnModel>(&model.fitted)) {
        if (knn->train_x.rows() == 0) throw StateError("predict: unfitted knn model");
        for (std::size_t r = 0; r < x.rows(); ++r) {
            out(r, 0) = knn_predict(*knn, x.data() + r * x.cols(), model.spec.knn.k);
        }
    } else if (const auto* nb = std::get_if<NbModel>(&model.fitted)) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            out(r, 0) = nb_predict(*nb, x.data() + r * x.cols());
        }
    } else if (const auto* linear = std::get_if<LinearModel>(&model.fitted)) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            out(r, 0) = linear_predict(*linear, x.data() + r * x.cols(), x.cols());
        }
    } else {
        const auto& deep = std::get<DeepModel>(model.fitted);
        out = network_forward(deep.net, x);
    }
    return out;
}

int predict(const TrainedModel& model, const std::vector<double>& row, double threshold) {
    return predict_proba(model, row) >= threshold ? 1 : 0;
}

}  // namespace phishguard::models
