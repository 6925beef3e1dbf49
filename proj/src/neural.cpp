#include "phishguard/neural.hpp"

#include <algorithm>
#include <cmath>

namespace phishguard {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double apply_activation(Activation act, double z) {
    switch (act) {
        case Activation::Sigmoid: return sigmoid(z);
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Identity: return z;
    }
    return z;
}

double bce_loss(double p, int y) {
    constexpr double kEps = 1e-12;
    p = std::clamp(p, kEps, 1.0 - kEps);
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

DenseLayer make_dense_layer(std::size_t fan_in, std::size_t fan_out, Activation act,
                            SeededRng& rng) {
    DenseLayer layer;
    layer.weights = random_init(fan_in, fan_out, InitScheme::ScaledByFanIn, rng);
    layer.bias = Matrix(1, fan_out, 0.0);
    layer.activation = act;
    return layer;
}

static Matrix apply_activation_matrix(Activation act, const Matrix& z) {
    Matrix a = z;
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = apply_activation(act, a.data()[i]);
    return a;
}

Matrix dense_forward(const Matrix& x, const DenseLayer& layer) {
    if (x.cols() != layer.fan_in()) {
        throw ShapeError("dense_forward: input " + x.shape_str() + " does not match fan_in " +
                         std::to_string(layer.fan_in()));
    }
    return apply_activation_matrix(layer.activation,
                                   add_row_broadcast(matmul(x, layer.weights), layer.bias));
}

LstmCell make_lstm_cell(std::size_t input_size, std::size_t hidden_size, SeededRng& rng) {
    LstmCell cell;
    cell.input_size = input_size;
    cell.hidden_size = hidden_size;
    const std::size_t z = input_size + hidden_size;
    cell.w_i = random_init(z, hidden_size, InitScheme::ScaledByFanIn, rng);
    cell.w_f = random_init(z, hidden_size, InitScheme::ScaledByFanIn, rng);
    cell.w_o = random_init(z, hidden_size, InitScheme::ScaledByFanIn, rng);
    cell.w_g = random_init(z, hidden_size, InitScheme::ScaledByFanIn, rng);
    cell.b_i = Matrix(1, hidden_size, 0.0);
    // Forget bias at 1 keeps early cell-state flow open.
    cell.b_f = Matrix(1, hidden_size, 1.0);
    cell.b_o = Matrix(1, hidden_size, 0.0);
    cell.b_g = Matrix(1, hidden_size, 0.0);
    return cell;
}

static void check_lstm_shapes(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                              const LstmCell& cell) {
    if (x_t.cols() != cell.input_size || h_prev.cols() != cell.hidden_size ||
        c_prev.cols() != cell.hidden_size || x_t.rows() != h_prev.rows() ||
        x_t.rows() != c_prev.rows()) {
        throw ShapeError("lstm_step: inputs " + x_t.shape_str() + "/" + h_prev.shape_str() + "/" +
                         c_prev.shape_str() + " do not match cell sizes (" +
                         std::to_string(cell.input_size) + "," +
                         std::to_string(cell.hidden_size) + ")");
    }
}

namespace {

struct LstmStepCache {
    Matrix zcat;                // batch x (input + hidden)
    Matrix gi, gf, go, gg;      // gate activations, batch x hidden
    Matrix c, tanh_c;           // batch x hidden
};

Matrix gate(const Matrix& zcat, const Matrix& w, const Matrix& b, Activation act) {
    return apply_activation_matrix(act, add_row_broadcast(matmul(zcat, w), b));
}

LstmStepCache lstm_step_cached(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                               const LstmCell& cell) {
    LstmStepCache s;
    s.zcat = hconcat(x_t, h_prev);
    s.gi = gate(s.zcat, cell.w_i, cell.b_i, Activation::Sigmoid);
    s.gf = gate(s.zcat, cell.w_f, cell.b_f, Activation::Sigmoid);
    s.go = gate(s.zcat, cell.w_o, cell.b_o, Activation::Sigmoid);
    s.gg = gate(s.zcat, cell.w_g, cell.b_g, Activation::Tanh);
    s.c = add(hadamard(s.gf, c_prev), hadamard(s.gi, s.gg));
    s.tanh_c = map(s.c, +[](double v) { return std::tanh(v); });
    return s;
}

struct LstmDirCache {
    std::vector<LstmStepCache> steps;
    Matrix h_final;
};

LstmDirCache lstm_run_cached(const std::vector<Matrix>& seq, const LstmCell& cell,
                             Direction direction) {
    if (seq.empty()) throw InputError("lstm_forward: empty sequence");
    const std::size_t batch = seq.front().rows();
    LstmDirCache cache;
    cache.steps.reserve(seq.size());
    Matrix h(batch, cell.hidden_size, 0.0);
    Matrix c(batch, cell.hidden_size, 0.0);
    for (std::size_t n = 0; n < seq.size(); ++n) {
        const Matrix& x_t =
            direction == Direction::Forward ? seq[n] : seq[seq.size() - 1 - n];
        check_lstm_shapes(x_t, h, c, cell);
        LstmStepCache s = lstm_step_cached(x_t, h, c, cell);
        h = hadamard(s.go, s.tanh_c);
        c = s.c;
        cache.steps.push_back(std::move(s));
    }
    cache.h_final = std::move(h);
    return cache;
}

struct CellGrads {
    Matrix w_i, w_f, w_o, w_g, b_i, b_f, b_o, b_g;
};

// BPTT for one direction; only the final hidden state receives an external
// gradient (the head reads just h_final).
void lstm_backward(const LstmDirCache& cache, const LstmCell& cell, const Matrix& dh_final,
                   LstmCell& grads) {
    const std::size_t batch = dh_final.rows();
    const std::size_t hid = cell.hidden_size;
    const Matrix wt_i = transpose(cell.w_i);
    const Matrix wt_f = transpose(cell.w_f);
    const Matrix wt_o = transpose(cell.w_o);
    const Matrix wt_g = transpose(cell.w_g);

    Matrix dh = dh_final;
    Matrix dc(batch, hid, 0.0);
    for (std::size_t t = cache.steps.size(); t-- > 0;) {
        const LstmStepCache& s = cache.steps[t];
        const Matrix& tc = s.tanh_c;

        Matrix d_o = hadamard(dh, tc);
        Matrix dct = dc;
        for (std::size_t i = 0; i < dct.size(); ++i) {
            const double tcv = tc.data()[i];
            dct.data()[i] += dh.data()[i] * s.go.data()[i] * (1.0 - tcv * tcv);
        }
        const Matrix c_prev = t > 0 ? cache.steps[t - 1].c : Matrix(batch, hid, 0.0);

        Matrix da_i = hadamard(dct, s.gg);
        Matrix da_g = hadamard(dct, s.gi);
        Matrix da_f = hadamard(dct, c_prev);
        // Through the gate nonlinearities.
        for (std::size_t i = 0; i < da_i.size(); ++i) {
            const double gi = s.gi.data()[i], gf = s.gf.data()[i], go = s.go.data()[i],
                         gg = s.gg.data()[i];
            da_i.data()[i] *= gi * (1.0 - gi);
            da_f.data()[i] *= gf * (1.0 - gf);
            d_o.data()[i] *= go * (1.0 - go);
            da_g.data()[i] *= 1.0 - gg * gg;
        }

        matmul_at_b_accum(s.zcat, da_i, grads.w_i);
        matmul_at_b_accum(s.zcat, da_f, grads.w_f);
        matmul_at_b_accum(s.zcat, d_o, grads.w_o);
        matmul_at_b_accum(s.zcat, da_g, grads.w_g);
        grads.b_i = add(grads.b_i, col_sums(da_i));
        grads.b_f = add(grads.b_f, col_sums(da_f));
        grads.b_o = add(grads.b_o, col_sums(d_o));
        grads.b_g = add(grads.b_g, col_sums(da_g));

        Matrix dz = matmul(da_i, wt_i);
        dz = add(dz, matmul(da_f, wt_f));
        dz = add(dz, matmul(d_o, wt_o));
        dz = add(dz, matmul(da_g, wt_g));
        dh = col_slice(dz, cell.input_size, cell.input_size + hid);
        dc = hadamard(dct, s.gf);
    }
}

}  // namespace

std::pair<Matrix, Matrix> lstm_step(const Matrix& x_t, const Matrix& h_prev,
                                    const Matrix& c_prev, const LstmCell& cell) {
    check_lstm_shapes(x_t, h_prev, c_prev, cell);
    LstmStepCache s = lstm_step_cached(x_t, h_prev, c_prev, cell);
    return {hadamard(s.go, s.tanh_c), s.c};
}

Matrix lstm_forward(const std::vector<Matrix>& seq, const LstmCell& cell, Direction direction) {
    return lstm_run_cached(seq, cell, direction).h_final;
}

std::size_t NetworkGraph::merged_width() const {
    std::size_t w = 0;
    if (!dense_branch.empty()) w += dense_branch.back().fan_out();
    if (recurrent) w += recurrent->output_width();
    if (w == 0) w = input_width;
    return w;
}

std::size_t NetworkGraph::param_count() const {
    std::size_t n = 0;
    for_each_param(*this, [&](const Matrix& m) { n += m.size(); });
    return n;
}

void NetworkGraph::validate() const {
    if (input_width == 0) throw ShapeError("network: input width must be positive");
    std::size_t w = input_width;
    for (const auto& layer : dense_branch) {
        if (layer.fan_in() != w) {
            throw ShapeError("network: dense branch width mismatch at fan_in " +
                             std::to_string(layer.fan_in()));
        }
        w = layer.fan_out();
    }
    if (recurrent && recurrent->forward.input_size != 1) {
        throw ShapeError("network: recurrent branch expects width-1 sequence input");
    }
    if (head.empty()) throw ShapeError("network: head is empty");
    std::size_t hw = merged_width();
    for (const auto& layer : head) {
        if (layer.fan_in() != hw) {
            throw ShapeError("network: head width mismatch at fan_in " +
                             std::to_string(layer.fan_in()));
        }
        hw = layer.fan_out();
    }
    if (hw != 1 || head.back().activation != Activation::Sigmoid) {
        throw ShapeError("network: head must end in a single sigmoid unit");
    }
}

Gradients zeros_like(const NetworkGraph& net) {
    Gradients g = net;
    for_each_param(g, [](Matrix& m) { m = Matrix(m.rows(), m.cols(), 0.0); });
    return g;
}

std::vector<Matrix> row_features_to_sequence(const Matrix& x) {
    std::vector<Matrix> seq;
    seq.reserve(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) seq.push_back(col_slice(x, c, c + 1));
    return seq;
}

namespace {

struct DenseCache {
    Matrix input;
    Matrix z;
    Matrix a;
};

DenseCache dense_forward_cached(const Matrix& x, const DenseLayer& layer) {
    DenseCache c;
    c.input = x;
    c.z = add_row_broadcast(matmul(x, layer.weights), layer.bias);
    c.a = apply_activation_matrix(layer.activation, c.z);
    return c;
}

struct FullCache {
    std::vector<DenseCache> dense;
    std::optional<LstmDirCache> lstm_fwd;
    std::optional<LstmDirCache> lstm_bwd;
    Matrix merged;
    std::vector<DenseCache> head;
};

FullCache network_forward_cached(const NetworkGraph& net, const Matrix& x) {
    if (x.cols() != net.input_width) {
        throw ShapeError("network forward: input " + x.shape_str() + " does not match width " +
                         std::to_string(net.input_width));
    }
    FullCache cache;
    Matrix dense_out;
    if (!net.dense_branch.empty()) {
        Matrix a = x;
        for (const auto& layer : net.dense_branch) {
            cache.dense.push_back(dense_forward_cached(a, layer));
            a = cache.dense.back().a;
        }
        dense_out = a;
    }
    Matrix lstm_out;
    if (net.recurrent) {
        const std::vector<Matrix> seq = row_features_to_sequence(x);
        cache.lstm_fwd = lstm_run_cached(seq, net.recurrent->forward, Direction::Forward);
        lstm_out = cache.lstm_fwd->h_final;
        if (net.recurrent->backward) {
            cache.lstm_bwd = lstm_run_cached(seq, *net.recurrent->backward, Direction::Backward);
            lstm_out = hconcat(lstm_out, cache.lstm_bwd->h_final);
        }
    }
    if (!net.dense_branch.empty() && net.recurrent) {
        cache.merged = hconcat(dense_out, lstm_out);
    } else if (!net.dense_branch.empty()) {
        cache.merged = dense_out;
    } else if (net.recurrent) {
        cache.merged = lstm_out;
    } else {
        cache.merged = x;
    }
    Matrix a = cache.merged;
    for (const auto& layer : net.head) {
        cache.head.push_back(dense_forward_cached(a, layer));
        a = cache.head.back().a;
    }
    return cache;
}

Matrix activation_derivative(Activation act, const Matrix& z, const Matrix& a) {
    Matrix d(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.size(); ++i) {
        switch (act) {
            case Activation::Sigmoid: {
                const double av = a.data()[i];
                d.data()[i] = av * (1.0 - av);
                break;
            }
            case Activation::Tanh: {
                const double av = a.data()[i];
                d.data()[i] = 1.0 - av * av;
                break;
            }
            case Activation::Relu:
                d.data()[i] = z.data()[i] > 0.0 ? 1.0 : 0.0;
                break;
            case Activation::Identity:
                d.data()[i] = 1.0;
                break;
        }
    }
    return d;
}

// Walks a dense stack backwards; `dz_last` is the gradient at the last
// layer's pre-activation when provided, otherwise `da` is the gradient at
// the stack output. Returns the gradient at the stack input.
Matrix dense_stack_backward(const std::vector<DenseLayer>& layers,
                            const std::vector<DenseCache>& caches, std::vector<DenseLayer>& grads,
                            Matrix da, const Matrix* dz_last) {
    for (std::size_t l = layers.size(); l-- > 0;) {
        const DenseLayer& layer = layers[l];
        const DenseCache& cache = caches[l];
        Matrix dz;
        if (dz_last != nullptr && l == layers.size() - 1) {
            dz = *dz_last;
        } else {
            dz = hadamard(da, activation_derivative(layer.activation, cache.z, cache.a));
        }
        matmul_at_b_accum(cache.input, dz, grads[l].weights);
        grads[l].bias = add(grads[l].bias, col_sums(dz));
        da = matmul(dz, transpose(layer.weights));
    }
    return da;
}

double mean_bce(const Matrix& prob, const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < prob.rows(); ++i) total += bce_loss(prob(i, 0), y[i]);
    return total / static_cast<double>(prob.rows());
}

}  // namespace

Matrix network_forward(const NetworkGraph& net, const Matrix& x) {
    FullCache cache = network_forward_cached(net, x);
    return cache.head.back().a;
}

std::pair<double, Gradients> backprop(const NetworkGraph& net, const Matrix& x,
                                      const std::vector<int>& y) {
    if (y.size() != x.rows()) {
        throw ShapeError("backprop: label count " + std::to_string(y.size()) +
                         " does not match batch " + x.shape_str());
    }
    net.validate();
    FullCache cache = network_forward_cached(net, x);
    const Matrix& prob = cache.head.back().a;
    const double loss = mean_bce(prob, y);
    const double inv_n = 1.0 / static_cast<double>(x.rows());

    Gradients grads = zeros_like(net);

    // Sigmoid head + BCE collapse to (p - y) / n at the final pre-activation.
    Matrix dz_head(prob.rows(), 1);
    for (std::size_t i = 0; i < prob.rows(); ++i) {
        dz_head(i, 0) = (prob(i, 0) - static_cast<double>(y[i])) * inv_n;
    }
    Matrix d_merged =
        dense_stack_backward(net.head, cache.head, grads.head, Matrix(), &dz_head);

    std::size_t offset = 0;
    if (!net.dense_branch.empty()) {
        const std::size_t w = net.dense_branch.back().fan_out();
        Matrix d_dense = net.recurrent ? col_slice(d_merged, 0, w) : d_merged;
        dense_stack_backward(net.dense_branch, cache.dense, grads.dense_branch, d_dense, nullptr);
        offset = w;
    }
    if (net.recurrent) {
        const std::size_t hf = net.recurrent->forward.hidden_size;
        Matrix dh_fwd = col_slice(d_merged, offset, offset + hf);
        lstm_backward(*cache.lstm_fwd, net.recurrent->forward, dh_fwd, grads.recurrent->forward);
        if (net.recurrent->backward) {
            const std::size_t hb = net.recurrent->backward->hidden_size;
            Matrix dh_bwd = col_slice(d_merged, offset + hf, offset + hf + hb);
            lstm_backward(*cache.lstm_bwd, *net.recurrent->backward, dh_bwd,
                          *grads.recurrent->backward);
        }
    }
    return {loss, grads};
}

double grad_check(const NetworkGraph& net, const Matrix& x, const std::vector<int>& y,
                  double fd_step, std::size_t max_params) {
    const std::size_t count = net.param_count();
    if (count > max_params) {
        throw ParamError("grad_check: " + std::to_string(count) +
                         " parameters exceed the cost guard of " + std::to_string(max_params));
    }
    auto [loss, grads] = backprop(net, x, y);
    (void)loss;

    NetworkGraph probe = net;
    std::vector<Matrix*> params;
    for_each_param(probe, [&](Matrix& m) { params.push_back(&m); });
    std::vector<Matrix*> analytic;
    for_each_param(grads, [&](Matrix& m) { analytic.push_back(&m); });

    double max_rel = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& pm = *params[p];
        for (std::size_t i = 0; i < pm.size(); ++i) {
            const double saved = pm.data()[i];
            pm.data()[i] = saved + fd_step;
            const double lp = mean_bce(network_forward(probe, x), y);
            pm.data()[i] = saved - fd_step;
            const double lm = mean_bce(network_forward(probe, x), y);
            pm.data()[i] = saved;
            const double numeric = (lp - lm) / (2.0 * fd_step);
            const double a = analytic[p]->data()[i];
            const double denom = std::max(1e-8, std::abs(a) + std::abs(numeric));
            max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
        }
    }
    return max_rel;
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ParamError("train: learning_rate must be positive");
    if (batch_size < 1) throw ParamError("train: batch_size must be at least 1");
}

TrainResult train_network(NetworkGraph& net, const Matrix& x, const std::vector<int>& y,
                          const TrainConfig& config) {
    config.validate();
    net.validate();
    if (y.size() != x.rows()) throw ShapeError("train: label count does not match rows");
    for (int label : y) {
        if (label != 0 && label != 1) throw InputError("train: labels must be 0 or 1");
    }
    TrainResult result;
    bool has0 = false, has1 = false;
    for (int label : y) (label == 0 ? has0 : has1) = true;
    result.single_class_warning = !(has0 && has1);

    Gradients m_state = zeros_like(net);
    Gradients v_state = zeros_like(net);
    std::vector<Matrix*> params, m_ptr, v_ptr;
    for_each_param(net, [&](Matrix& mat) { params.push_back(&mat); });
    for_each_param(m_state, [&](Matrix& mat) { m_ptr.push_back(&mat); });
    for_each_param(v_state, [&](Matrix& mat) { v_ptr.push_back(&mat); });

    SeededRng rng(config.seed);
    std::vector<std::size_t> order(x.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            Matrix bx(end - start, x.cols());
            std::vector<int> by(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t src = order[i];
                for (std::size_t c = 0; c < x.cols(); ++c) bx(i - start, c) = x(src, c);
                by[i - start] = y[src];
            }
            auto [loss, grads] = backprop(net, bx, by);
            epoch_loss += loss;
            ++batches;
            ++step;

            std::vector<Matrix*> g_ptr;
            for_each_param(grads, [&](Matrix& mat) { g_ptr.push_back(&mat); });
            if (config.optimizer == Optimizer::Sgd) {
                for (std::size_t p = 0; p < params.size(); ++p) {
                    double* pd = params[p]->data();
                    const double* gd = g_ptr[p]->data();
                    for (std::size_t i = 0; i < params[p]->size(); ++i) {
                        pd[i] -= config.learning_rate * gd[i];
                    }
                }
            } else {
                const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
                const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
                for (std::size_t p = 0; p < params.size(); ++p) {
                    double* pd = params[p]->data();
                    double* md = m_ptr[p]->data();
                    double* vd = v_ptr[p]->data();
                    const double* gd = g_ptr[p]->data();
                    for (std::size_t i = 0; i < params[p]->size(); ++i) {
                        md[i] = config.beta1 * md[i] + (1.0 - config.beta1) * gd[i];
                        vd[i] = config.beta2 * vd[i] + (1.0 - config.beta2) * gd[i] * gd[i];
                        const double mhat = md[i] / bc1;
                        const double vhat = vd[i] / bc2;
                        pd[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
                    }
                }
            }
        }
        result.loss_curve.push_back(batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0);
    }
    return result;
}

}  // namespace phishguard
