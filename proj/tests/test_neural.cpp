#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "phishguard/neural.hpp"

using namespace phishguard;

namespace {

// Scalar-arithmetic LSTM step oracle, independent of the Matrix code path.
void scalar_lstm_step(const std::vector<double>& x, const std::vector<double>& h_prev,
                      const std::vector<double>& c_prev, const LstmCell& cell,
                      std::vector<double>& h_out, std::vector<double>& c_out) {
    const std::size_t in = cell.input_size, hid = cell.hidden_size;
    std::vector<double> z(in + hid);
    for (std::size_t i = 0; i < in; ++i) z[i] = x[i];
    for (std::size_t i = 0; i < hid; ++i) z[in + i] = h_prev[i];
    auto dot_col = [&](const Matrix& w, const Matrix& b, std::size_t j) {
        double acc = b(0, j);
        for (std::size_t r = 0; r < z.size(); ++r) acc += z[r] * w(r, j);
        return acc;
    };
    h_out.resize(hid);
    c_out.resize(hid);
    for (std::size_t j = 0; j < hid; ++j) {
        const double gi = 1.0 / (1.0 + std::exp(-dot_col(cell.w_i, cell.b_i, j)));
        const double gf = 1.0 / (1.0 + std::exp(-dot_col(cell.w_f, cell.b_f, j)));
        const double go = 1.0 / (1.0 + std::exp(-dot_col(cell.w_o, cell.b_o, j)));
        const double gg = std::tanh(dot_col(cell.w_g, cell.b_g, j));
        c_out[j] = gf * c_prev[j] + gi * gg;
        h_out[j] = go * std::tanh(c_out[j]);
    }
}

LstmCell zero_cell(std::size_t in, std::size_t hid) {
    LstmCell c;
    c.input_size = in;
    c.hidden_size = hid;
    c.w_i = c.w_f = c.w_o = c.w_g = Matrix(in + hid, hid, 0.0);
    c.b_i = c.b_f = c.b_o = c.b_g = Matrix(1, hid, 0.0);
    return c;
}

NetworkGraph small_dense_net(std::uint64_t seed) {
    SeededRng rng(seed);
    NetworkGraph net;
    net.input_width = 8;
    net.head.push_back(make_dense_layer(8, 4, Activation::Tanh, rng));
    net.head.push_back(make_dense_layer(4, 1, Activation::Sigmoid, rng));
    return net;
}

NetworkGraph small_lstm_net(std::uint64_t seed, std::size_t width, std::size_t hidden) {
    SeededRng rng(seed);
    NetworkGraph net;
    net.input_width = width;
    net.recurrent = LstmBranch{make_lstm_cell(1, hidden, rng), std::nullopt};
    net.head.push_back(make_dense_layer(hidden, 1, Activation::Sigmoid, rng));
    return net;
}

NetworkGraph small_hybrid_net(std::uint64_t seed) {
    SeededRng rng(seed);
    NetworkGraph net;
    net.input_width = 5;
    net.dense_branch.push_back(make_dense_layer(5, 3, Activation::Relu, rng));
    net.recurrent = LstmBranch{make_lstm_cell(1, 4, rng), make_lstm_cell(1, 4, rng)};
    net.head.push_back(make_dense_layer(3 + 8, 3, Activation::Tanh, rng));
    net.head.push_back(make_dense_layer(3, 1, Activation::Sigmoid, rng));
    return net;
}

std::pair<Matrix, std::vector<int>> random_batch(std::size_t n, std::size_t width,
                                                 std::uint64_t seed) {
    SeededRng rng(seed);
    Matrix x(n, width);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.5, 1.5);
    for (std::size_t i = 0; i < n; ++i) y[i] = rng.next_below(2) == 1 ? 1 : 0;
    return {x, y};
}

}  // namespace

TEST_CASE("sigmoid analytic values and symmetry") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5));
    CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75));
    SeededRng rng(2);
    for (int i = 0; i < 50; ++i) {
        const double z = rng.uniform(-20, 20);
        CHECK(sigmoid(-z) == doctest::Approx(1.0 - sigmoid(z)).epsilon(1e-12));
    }
    // Saturates instead of overflowing.
    CHECK(sigmoid(700.0) == doctest::Approx(1.0));
    CHECK(sigmoid(-700.0) == doctest::Approx(0.0));
    CHECK(std::isfinite(sigmoid(-745.0)));
}

TEST_CASE("bce_loss analytic values") {
    CHECK(bce_loss(1.0, 1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)));
    CHECK(bce_loss(0.5, 0) == doctest::Approx(std::log(2.0)));
    CHECK(std::isfinite(bce_loss(0.0, 1)));
    CHECK(std::isfinite(bce_loss(1.0, 0)));
}

TEST_CASE("dense_forward identity and z=0 sigmoid") {
    DenseLayer id_layer;
    id_layer.weights = Matrix(2, 2, {1, 0, 0, 1});
    id_layer.bias = Matrix(1, 2, 0.0);
    id_layer.activation = Activation::Identity;
    Matrix x(1, 2, {1, 2});
    Matrix r = dense_forward(x, id_layer);
    CHECK(r(0, 0) == 1);
    CHECK(r(0, 1) == 2);

    DenseLayer sig;
    sig.weights = Matrix(2, 1, {2, 3});
    sig.bias = Matrix(1, 1, {-5});
    sig.activation = Activation::Sigmoid;
    Matrix x2(1, 2, {1, 1});
    CHECK(dense_forward(x2, sig)(0, 0) == doctest::Approx(0.5));

    // Batch rows behave independently.
    Matrix both(2, 2, {1, 2, 1, 1});
    DenseLayer lin;
    lin.weights = Matrix(2, 1, {2, 3});
    lin.bias = Matrix(1, 1, {-5});
    lin.activation = Activation::Sigmoid;
    Matrix rb = dense_forward(both, lin);
    CHECK(rb(0, 0) == doctest::Approx(dense_forward(row_slice(both, 0, 1), lin)(0, 0)));
    CHECK(rb(1, 0) == doctest::Approx(dense_forward(row_slice(both, 1, 2), lin)(0, 0)));

    Matrix bad(1, 3);
    CHECK_THROWS_AS(dense_forward(bad, sig), ShapeError);
}

TEST_CASE("lstm_step zero cell analytic cases") {
    LstmCell cell = zero_cell(1, 1);
    Matrix x(1, 1, {0.7});
    Matrix h0(1, 1, 0.0);

    Matrix c0(1, 1, 0.0);
    auto [h, c] = lstm_step(x, h0, c0, cell);
    CHECK(h(0, 0) == doctest::Approx(0.0));
    CHECK(c(0, 0) == doctest::Approx(0.0));

    Matrix c1(1, 1, {1.0});
    auto [h2, c2] = lstm_step(x, h0, c1, cell);
    CHECK(c2(0, 0) == doctest::Approx(0.5));
    CHECK(h2(0, 0) == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-6));
    CHECK(h2(0, 0) == doctest::Approx(0.2311).epsilon(1e-3));
}

TEST_CASE("lstm_step matches scalar oracle on random cells") {
    SeededRng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t in = 1 + rng.next_below(4);
        const std::size_t hid = 1 + rng.next_below(5);
        LstmCell cell = make_lstm_cell(in, hid, rng);
        std::vector<double> xv(in), hv(hid), cv(hid);
        for (auto& v : xv) v = rng.uniform(-2, 2);
        for (auto& v : hv) v = rng.uniform(-1, 1);
        for (auto& v : cv) v = rng.uniform(-1, 1);
        Matrix x(1, in, xv), h0(1, hid, hv), c0(1, hid, cv);
        auto [h, c] = lstm_step(x, h0, c0, cell);
        std::vector<double> oh, oc;
        scalar_lstm_step(xv, hv, cv, cell, oh, oc);
        for (std::size_t j = 0; j < hid; ++j) {
            CHECK(std::abs(h(0, j) - oh[j]) < 1e-12);
            CHECK(std::abs(c(0, j) - oc[j]) < 1e-12);
        }
    }
}

TEST_CASE("lstm_forward basics") {
    SeededRng rng(22);
    LstmCell cell = make_lstm_cell(2, 3, rng);
    Matrix x(1, 2, {0.3, -0.4});

    // Length-1 sequence equals a single step from zero states.
    Matrix h0(1, 3, 0.0), c0(1, 3, 0.0);
    auto [hs, cs] = lstm_step(x, h0, c0, cell);
    Matrix hf = lstm_forward({x}, cell);
    for (std::size_t j = 0; j < 3; ++j) CHECK(hf(0, j) == doctest::Approx(hs(0, j)));

    // Zero cell gives zero hidden state for any sequence.
    LstmCell z = zero_cell(2, 3);
    Matrix hz = lstm_forward({x, x, x}, z);
    for (std::size_t j = 0; j < 3; ++j) CHECK(hz(0, j) == doctest::Approx(0.0));

    CHECK_THROWS_AS(lstm_forward({}, cell), InputError);
}

TEST_CASE("lstm_forward palindromic sequence is direction-invariant") {
    SeededRng rng(23);
    LstmCell cell = make_lstm_cell(1, 4, rng);
    Matrix a(2, 1, {0.1, -0.2}), b(2, 1, {0.5, 0.4}), c(2, 1, {-0.3, 0.9});
    std::vector<Matrix> palindrome = {a, b, c, b, a};
    Matrix fwd = lstm_forward(palindrome, cell, Direction::Forward);
    Matrix bwd = lstm_forward(palindrome, cell, Direction::Backward);
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        CHECK(fwd.data()[i] == doctest::Approx(bwd.data()[i]).epsilon(1e-12));
    }
}

TEST_CASE("backprop single sigmoid unit analytic gradient") {
    NetworkGraph net;
    net.input_width = 1;
    DenseLayer out;
    out.weights = Matrix(1, 1, 0.0);
    out.bias = Matrix(1, 1, 0.0);
    out.activation = Activation::Sigmoid;
    net.head.push_back(out);

    Matrix x(1, 1, {1.0});
    auto [loss, grads] = backprop(net, x, {1});
    CHECK(loss == doctest::Approx(std::log(2.0)));
    CHECK(grads.head[0].weights(0, 0) == doctest::Approx(-0.5));
    CHECK(grads.head[0].bias(0, 0) == doctest::Approx(-0.5));
}

TEST_CASE("backprop near-zero gradients at a constructed optimum") {
    NetworkGraph net;
    net.input_width = 1;
    DenseLayer out;
    out.weights = Matrix(1, 1, {30.0});
    out.bias = Matrix(1, 1, 0.0);
    out.activation = Activation::Sigmoid;
    net.head.push_back(out);
    // p is essentially equal to y for every sample.
    Matrix x(2, 1, {5.0, -5.0});
    auto [loss, grads] = backprop(net, x, {1, 0});
    CHECK(loss < 1e-10);
    CHECK(std::abs(grads.head[0].weights(0, 0)) < 1e-10);
}

TEST_CASE("grad_check dense 8-4-1 net") {
    NetworkGraph net = small_dense_net(42);
    auto [x, y] = random_batch(16, 8, 42);
    CHECK(grad_check(net, x, y) < 1e-4);
    // Determinism of the error value.
    CHECK(grad_check(net, x, y) == grad_check(net, x, y));
}

TEST_CASE("grad_check lstm hidden-6 over length-5 sequences") {
    NetworkGraph net = small_lstm_net(7, 5, 6);
    auto [x, y] = random_batch(8, 5, 7);
    CHECK(grad_check(net, x, y) < 1e-4);
}

TEST_CASE("grad_check hybrid with bilstm branch") {
    NetworkGraph net = small_hybrid_net(9);
    auto [x, y] = random_batch(6, 5, 9);
    CHECK(grad_check(net, x, y) < 1e-4);
}

TEST_CASE("grad_check property over seeded random networks") {
    for (std::uint64_t seed = 100; seed < 105; ++seed) {
        NetworkGraph net = small_dense_net(seed);
        auto [x, y] = random_batch(12, 8, seed);
        CHECK(grad_check(net, x, y) < 1e-4);
    }
}

TEST_CASE("grad_check cost guard") {
    NetworkGraph net = small_dense_net(1);
    auto [x, y] = random_batch(4, 8, 1);
    CHECK_THROWS_AS(grad_check(net, x, y, 1e-5, 10), ParamError);
}

TEST_CASE("train_network learns separable blobs") {
    SeededRng rng(31);
    Matrix x(40, 2);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        const int label = i < 20 ? 0 : 1;
        const double cx = label == 0 ? -1.5 : 1.5;
        x(i, 0) = cx + rng.normal() * 0.3;
        x(i, 1) = cx + rng.normal() * 0.3;
        y[i] = label;
    }
    SeededRng init(5);
    NetworkGraph net;
    net.input_width = 2;
    net.head.push_back(make_dense_layer(2, 4, Activation::Relu, init));
    net.head.push_back(make_dense_layer(4, 1, Activation::Sigmoid, init));

    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.01;
    cfg.seed = 3;
    TrainResult result = train_network(net, x, y, cfg);
    CHECK(result.loss_curve.size() == 200);
    CHECK_FALSE(result.single_class_warning);

    Matrix p = network_forward(net, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        if ((p(i, 0) >= 0.5 ? 1 : 0) == y[i]) ++correct;
    }
    CHECK(correct == 40);
}

TEST_CASE("train_network zero epochs leaves parameters unchanged") {
    NetworkGraph net = small_dense_net(3);
    NetworkGraph before = net;
    auto [x, y] = random_batch(10, 8, 3);
    TrainConfig cfg;
    cfg.epochs = 0;
    train_network(net, x, y, cfg);
    std::vector<Matrix*> a, b;
    for_each_param(net, [&](Matrix& m) { a.push_back(&m); });
    for_each_param(before, [&](Matrix& m) { b.push_back(&m); });
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->values() == b[i]->values());
}

TEST_CASE("train_network deterministic under fixed seed") {
    auto run = [] {
        NetworkGraph net = small_dense_net(77);
        auto [x, y] = random_batch(32, 8, 77);
        TrainConfig cfg;
        cfg.epochs = 5;
        cfg.seed = 11;
        train_network(net, x, y, cfg);
        std::vector<double> flat;
        for_each_param(net, [&](Matrix& m) {
            flat.insert(flat.end(), m.values().begin(), m.values().end());
        });
        return flat;
    };
    CHECK(run() == run());
}

TEST_CASE("train_network flags single-class data but still runs") {
    NetworkGraph net = small_dense_net(4);
    auto [x, y] = random_batch(8, 8, 4);
    for (auto& label : y) label = 1;
    TrainConfig cfg;
    cfg.epochs = 2;
    TrainResult r = train_network(net, x, y, cfg);
    CHECK(r.single_class_warning);
    CHECK(r.loss_curve.size() == 2);
}

TEST_CASE("forward output stays in (0,1)") {
    NetworkGraph net = small_hybrid_net(55);
    auto [x, y] = random_batch(20, 5, 55);
    (void)y;
    Matrix p = network_forward(net, x);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.data()[i] > 0.0);
        CHECK(p.data()[i] < 1.0);
    }
}
