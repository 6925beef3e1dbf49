#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "phishguard/dataset.hpp"
#include "phishguard/matrix.hpp"
#include "phishguard/neural.hpp"

namespace phishguard::models {

enum class Kind {
    DecisionTree,
    Knn,
    NaiveBayes,
    LogisticRegression,
    LinearSvm,
    Ann,
    Lstm,
    Bilstm,
    AnnLstm,
};

const std::vector<Kind>& all_kinds();
std::string kind_name(Kind kind);
Kind kind_from_name(const std::string& name);  // throws ParamError
bool is_deep(Kind kind);

struct TreeParams {
    std::size_t max_depth = 64;
    std::size_t min_leaf = 1;
};

struct KnnParams {
    std::size_t k = 100;  // mirrors the reported configuration
};

struct NbParams {
    double variance_floor = 1e-9;
};

struct LinearParams {
    double learning_rate = 0.1;
    std::size_t epochs = 200;
    double l2 = 1e-4;
    std::size_t batch_size = 32;
};

struct DeepParams {
    std::vector<std::size_t> dense_widths;  // parallel dense branch
    std::size_t lstm_hidden = 0;            // 0: no recurrent branch
    bool bidirectional = false;
    std::vector<std::size_t> head_widths;   // last entry must be 1
    TrainConfig train;
};

struct ClassifierSpec {
    Kind kind = Kind::LogisticRegression;
    std::uint64_t seed = 0;
    dataset::ScalerMode scaling = dataset::ScalerMode::Standard;
    TreeParams tree;
    KnnParams knn;
    NbParams nb;
    LinearParams linear;
    DeepParams deep;

    void validate() const;
};

ClassifierSpec default_spec(Kind kind);
ClassifierSpec build_ann_spec();       // dense 48-64-32-1, relu hidden
ClassifierSpec build_lstm_spec();      // hidden 128, dense 128-1 sigmoid
ClassifierSpec build_bilstm_spec();    // two directions, hidden 64 each
ClassifierSpec build_ann_lstm_spec();  // dense 64-32 || lstm 64 -> 96-32-1

// Fitted payloads -----------------------------------------------------------

struct TreeModel {
    struct Node {
        int feature = -1;  // -1: leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double prob = 0.0;  // class-1 probability at leaves
    };
    std::vector<Node> nodes;  // nodes[0] is the root
};

struct KnnModel {
    Matrix train_x;
    std::vector<int> train_y;
};

struct NbModel {
    double prior1 = 0.5;
    std::vector<double> mean0, var0, mean1, var1;
};

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    bool hinge = false;  // hinge emits sigmoid(margin) as probability
};

struct DeepModel {
    NetworkGraph net;
    std::vector<double> loss_curve;
};

struct TrainedModel {
    ClassifierSpec spec;
    std::uint64_t schema_fp = 0;
    dataset::ScalerStats scaler;  // fitted on this model's training rows
    std::variant<TreeModel, KnnModel, NbModel, LinearModel, DeepModel> fitted;
    double train_seconds = 0.0;
    bool single_class_warning = false;
};

// Standalone fitters, also used by the test oracles -------------------------

double gini_impurity(std::size_t count1, std::size_t count0);
TreeModel fit_decision_tree(const Matrix& x, const std::vector<int>& y, const TreeParams& hp);
double tree_predict(const TreeModel& tree, const double* row);

NbModel fit_gaussian_nb(const Matrix& x, const std::vector<int>& y, double variance_floor);
double nb_predict(const NbModel& model, const double* row);

LinearModel fit_linear(const Matrix& x, const std::vector<int>& y, bool hinge,
                       const LinearParams& hp, std::uint64_t seed);
double linear_predict(const LinearModel& model, const double* row, std::size_t cols);

// Fraction of class-1 labels among the k nearest rows by Euclidean
// distance; distance ties break toward the lower training-row index.
double knn_predict(const KnnModel& model, const double* query, std::size_t k);

// Uniform contract ----------------------------------------------------------

// Fits the spec on raw (unscaled) training rows; the model fits and stores
// its own scaler per spec.scaling.
TrainedModel fit(const ClassifierSpec& spec, const Matrix& train_x,
                 const std::vector<int>& train_y);

double predict_proba(const TrainedModel& model, const std::vector<double>& row);
Matrix predict_proba_batch(const TrainedModel& model, const Matrix& x);
int predict(const TrainedModel& model, const std::vector<double>& row, double threshold = 0.5);

// Versioned binary container, magic "PHFG"; byte-stable across platforms.
void save_model(const TrainedModel& model, const std::string& path);
std::vector<unsigned char> serialize_model(const TrainedModel& model);
TrainedModel load_model(const std::string& path);
TrainedModel deserialize_model(const std::vector<unsigned char>& bytes);

}  // namespace phishguard::models
