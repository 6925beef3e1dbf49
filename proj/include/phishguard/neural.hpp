#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "phishguard/matrix.hpp"

namespace phishguard {

enum class Activation { Sigmoid, Relu, Tanh, Identity };

// Numerically stable logistic function; saturates instead of overflowing.
double sigmoid(double z);
double apply_activation(Activation act, double z);

// Binary cross-entropy for a single prediction; p is clamped to
// [1e-12, 1 - 1e-12] before the logs.
double bce_loss(double p, int y);

struct DenseLayer {
    Matrix weights;  // fan_in x fan_out
    Matrix bias;     // 1 x fan_out
    Activation activation = Activation::Identity;

    std::size_t fan_in() const { return weights.rows(); }
    std::size_t fan_out() const { return weights.cols(); }
};

DenseLayer make_dense_layer(std::size_t fan_in, std::size_t fan_out, Activation act,
                            SeededRng& rng);
Matrix dense_forward(const Matrix& x, const DenseLayer& layer);

// Standard gated cell: input/forget/output gates plus tanh candidate. Gate
// weights act on the concatenation [x_t, h_prev].
struct LstmCell {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    Matrix w_i, w_f, w_o, w_g;  // (input_size + hidden_size) x hidden_size
    Matrix b_i, b_f, b_o, b_g;  // 1 x hidden_size
};

LstmCell make_lstm_cell(std::size_t input_size, std::size_t hidden_size, SeededRng& rng);

// One timestep: returns (h, c).
std::pair<Matrix, Matrix> lstm_step(const Matrix& x_t, const Matrix& h_prev,
                                    const Matrix& c_prev, const LstmCell& cell);

enum class Direction { Forward, Backward };

// Runs the cell over the sequence from zero initial states and returns the
// final hidden state. Backward direction reverses the sequence first.
Matrix lstm_forward(const std::vector<Matrix>& seq, const LstmCell& cell,
                    Direction direction = Direction::Forward);

struct LstmBranch {
    LstmCell forward;
    std::optional<LstmCell> backward;  // present for the bidirectional variant
    std::size_t output_width() const {
        return forward.hidden_size + (backward ? backward->hidden_size : 0);
    }
};

// Network topology family covering all four deep models: an optional dense
// branch and an optional recurrent branch over the same input, concatenated
// and fed through a dense head ending in a single sigmoid unit.
//
// The recurrent branch reads the feature row as a length-input_width
// sequence of width-1 inputs (the tabular-to-sequence adaptation).
struct NetworkGraph {
    std::size_t input_width = 0;
    std::vector<DenseLayer> dense_branch;
    std::optional<LstmBranch> recurrent;
    std::vector<DenseLayer> head;  // last layer: one sigmoid unit

    std::size_t merged_width() const;
    std::size_t param_count() const;
    void validate() const;  // adjacent widths match, one output unit
};

// Visits every parameter matrix in a fixed order (dense branch, recurrent
// forward gates, recurrent backward gates, head).
template <typename Net, typename F>
void for_each_param(Net& net, F&& f) {
    for (auto& layer : net.dense_branch) {
        f(layer.weights);
        f(layer.bias);
    }
    if (net.recurrent) {
        auto visit_cell = [&](auto& c) {
            f(c.w_i); f(c.w_f); f(c.w_o); f(c.w_g);
            f(c.b_i); f(c.b_f); f(c.b_o); f(c.b_g);
        };
        visit_cell(net.recurrent->forward);
        if (net.recurrent->backward) visit_cell(*net.recurrent->backward);
    }
    for (auto& layer : net.head) {
        f(layer.weights);
        f(layer.bias);
    }
}

// Gradients share the NetworkGraph layout; activation tags are ignored.
using Gradients = NetworkGraph;

Gradients zeros_like(const NetworkGraph& net);

// Forward pass to probabilities, shape (batch x 1).
Matrix network_forward(const NetworkGraph& net, const Matrix& x);

// Mean BCE loss and exact analytic gradients for a batch.
std::pair<double, Gradients> backprop(const NetworkGraph& net, const Matrix& x,
                                      const std::vector<int>& y);

// Max relative deviation between analytic and central-finite-difference
// gradients. Guards against accidental use on large networks.
double grad_check(const NetworkGraph& net, const Matrix& x, const std::vector<int>& y,
                  double fd_step = 1e-5, std::size_t max_params = 10000);

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainResult {
    std::vector<double> loss_curve;  // one mean-loss entry per epoch
    bool single_class_warning = false;
};

TrainResult train_network(NetworkGraph& net, const Matrix& x, const std::vector<int>& y,
                          const TrainConfig& config);

// Column t of the batch becomes timestep t (batch x 1).
std::vector<Matrix> row_features_to_sequence(const Matrix& x);

}  // namespace phishguard
