#include <cstring>
#include <fstream>

#include "phishguard/models.hpp"

namespace phishguard::models {

namespace {

constexpr char kMagic[4] = {'P', 'H', 'F', 'G'};
constexpr std::uint32_t kVersion = 1;

class Writer {
  public:
    std::vector<unsigned char> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void vec_f64(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
    void vec_u64(const std::vector<std::size_t>& v) {
        u64(v.size());
        for (std::size_t d : v) u64(d);
    }
    void matrix(const Matrix& m) {
        u64(m.rows());
        u64(m.cols());
        for (double d : m.values()) f64(d);
    }
};

class Reader {
  public:
    explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::vector<double> vec_f64() {
        const std::uint64_t n = checked_count(u64(), 8);
        std::vector<double> v(n);
        for (auto& d : v) d = f64();
        return v;
    }
    std::vector<std::size_t> vec_u64() {
        const std::uint64_t n = checked_count(u64(), 8);
        std::vector<std::size_t> v(n);
        for (auto& d : v) d = u64();
        return v;
    }
    Matrix matrix() {
        const std::uint64_t rows = u64();
        const std::uint64_t cols = checked_count(u64(), 8 * std::max<std::uint64_t>(rows, 1));
        std::vector<double> data(rows * cols);
        for (auto& d : data) d = f64();
        return Matrix(rows, cols, std::move(data));
    }
    bool done() const { return pos_ == bytes_.size(); }

  private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw FormatError("model file truncated");
    }
    std::uint64_t checked_count(std::uint64_t n, std::uint64_t unit) {
        if (n * unit > bytes_.size()) throw FormatError("model file truncated");
        return n;
    }
    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 0;
};

void write_spec(Writer& w, const ClassifierSpec& spec) {
    w.u8(static_cast<std::uint8_t>(spec.kind));
    w.u64(spec.seed);
    w.u8(static_cast<std::uint8_t>(spec.scaling));
    w.u64(spec.tree.max_depth);
    w.u64(spec.tree.min_leaf);
    w.u64(spec.knn.k);
    w.f64(spec.nb.variance_floor);
    w.f64(spec.linear.learning_rate);
    w.u64(spec.linear.epochs);
    w.f64(spec.linear.l2);
    w.u64(spec.linear.batch_size);
    w.vec_u64(spec.deep.dense_widths);
    w.u64(spec.deep.lstm_hidden);
    w.u8(spec.deep.bidirectional ? 1 : 0);
    w.vec_u64(spec.deep.head_widths);
    w.u64(spec.deep.train.epochs);
    w.u64(spec.deep.train.batch_size);
    w.f64(spec.deep.train.learning_rate);
    w.u8(static_cast<std::uint8_t>(spec.deep.train.optimizer));
    w.f64(spec.deep.train.beta1);
    w.f64(spec.deep.train.beta2);
    w.f64(spec.deep.train.epsilon);
}

ClassifierSpec read_spec(Reader& r) {
    ClassifierSpec spec;
    spec.kind = static_cast<Kind>(r.u8());
    spec.seed = r.u64();
    spec.scaling = static_cast<dataset::ScalerMode>(r.u8());
    spec.tree.max_depth = r.u64();
    spec.tree.min_leaf = r.u64();
    spec.knn.k = r.u64();
    spec.nb.variance_floor = r.f64();
    spec.linear.learning_rate = r.f64();
    spec.linear.epochs = r.u64();
    spec.linear.l2 = r.f64();
    spec.linear.batch_size = r.u64();
    spec.deep.dense_widths = r.vec_u64();
    spec.deep.lstm_hidden = r.u64();
    spec.deep.bidirectional = r.u8() != 0;
    spec.deep.head_widths = r.vec_u64();
    spec.deep.train.epochs = r.u64();
    spec.deep.train.batch_size = r.u64();
    spec.deep.train.learning_rate = r.f64();
    spec.deep.train.optimizer = static_cast<Optimizer>(r.u8());
    spec.deep.train.beta1 = r.f64();
    spec.deep.train.beta2 = r.f64();
    spec.deep.train.epsilon = r.f64();
    return spec;
}

void write_dense(Writer& w, const DenseLayer& layer) {
    w.matrix(layer.weights);
    w.matrix(layer.bias);
    w.u8(static_cast<std::uint8_t>(layer.activation));
}

DenseLayer read_dense(Reader& r) {
    DenseLayer layer;
    layer.weights = r.matrix();
    layer.bias = r.matrix();
    layer.activation = static_cast<Activation>(r.u8());
    return layer;
}

void write_cell(Writer& w, const LstmCell& cell) {
    w.u64(cell.input_size);
    w.u64(cell.hidden_size);
    for (const Matrix* m : {&cell.w_i, &cell.w_f, &cell.w_o, &cell.w_g, &cell.b_i, &cell.b_f,
                            &cell.b_o, &cell.b_g}) {
        w.matrix(*m);
    }
}

LstmCell read_cell(Reader& r) {
    LstmCell cell;
    cell.input_size = r.u64();
    cell.hidden_size = r.u64();
    for (Matrix* m : {&cell.w_i, &cell.w_f, &cell.w_o, &cell.w_g, &cell.b_i, &cell.b_f, &cell.b_o,
                      &cell.b_g}) {
        *m = r.matrix();
    }
    return cell;
}

}  // namespace

std::vector<unsigned char> serialize_model(const TrainedModel& model) {
    Writer w;
    w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
    w.u32(kVersion);
    write_spec(w, model.spec);
    w.u64(model.schema_fp);
    w.u8(static_cast<std::uint8_t>(model.scaler.mode));
    w.vec_f64(model.scaler.center);
    w.vec_f64(model.scaler.spread);
    // Wall-clock training time is a session statistic, not a parameter;
    // writing it would break byte-stable reruns. The slot stays for layout
    // compatibility and always reads back as zero.
    w.f64(0.0);
    w.u8(model.single_class_warning ? 1 : 0);

    if (const auto* tree = std::get_if<TreeModel>(&model.fitted)) {
        w.u64(tree->nodes.size());
        for (const auto& node : tree->nodes) {
            w.i32(node.feature);
            w.f64(node.threshold);
            w.i32(node.left);
            w.i32(node.right);
            w.f64(node.prob);
        }
    } else if (const auto* knn = std::get_if<KnnModel>(&model.fitted)) {
        w.matrix(knn->train_x);
        w.u64(knn->train_y.size());
        for (int label : knn->train_y) w.u8(static_cast<std::uint8_t>(label));
    } else if (const auto* nb = std::get_if<NbModel>(&model.fitted)) {
        w.f64(nb->prior1);
        w.vec_f64(nb->mean0);
        w.vec_f64(nb->var0);
        w.vec_f64(nb->mean1);
        w.vec_f64(nb->var1);
    } else if (const auto* linear = std::get_if<LinearModel>(&model.fitted)) {
        w.vec_f64(linear->weights);
        w.f64(linear->bias);
        w.u8(linear->hinge ? 1 : 0);
    } else {
        const auto& deep = std::get<DeepModel>(model.fitted);
        w.u64(deep.net.input_width);
        w.u64(deep.net.dense_branch.size());
        for (const auto& layer : deep.net.dense_branch) write_dense(w, layer);
        w.u8(deep.net.recurrent ? 1 : 0);
        if (deep.net.recurrent) {
            write_cell(w, deep.net.recurrent->forward);
            w.u8(deep.net.recurrent->backward ? 1 : 0);
            if (deep.net.recurrent->backward) write_cell(w, *deep.net.recurrent->backward);
        }
        w.u64(deep.net.head.size());
        for (const auto& layer : deep.net.head) write_dense(w, layer);
        w.vec_f64(deep.loss_curve);
    }
    return w.bytes;
}

TrainedModel deserialize_model(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("not a PHFG model file");
    }
    Reader r(bytes);
    r.u32();  // magic, already checked
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw FormatError("unsupported model format version " + std::to_string(version));
    }
    TrainedModel model;
    model.spec = read_spec(r);
    model.schema_fp = r.u64();
    model.scaler.mode = static_cast<dataset::ScalerMode>(r.u8());
    model.scaler.center = r.vec_f64();
    model.scaler.spread = r.vec_f64();
    model.train_seconds = r.f64();
    model.single_class_warning = r.u8() != 0;

    switch (model.spec.kind) {
        case Kind::DecisionTree: {
            TreeModel tree;
            const std::uint64_t count = r.u64();
            tree.nodes.resize(count);
            for (auto& node : tree.nodes) {
                node.feature = r.i32();
                node.threshold = r.f64();
                node.left = r.i32();
                node.right = r.i32();
                node.prob = r.f64();
            }
            model.fitted = std::move(tree);
            break;
        }
        case Kind::Knn: {
            KnnModel knn;
            knn.train_x = r.matrix();
            const std::uint64_t count = r.u64();
            knn.train_y.resize(count);
            for (auto& label : knn.train_y) label = r.u8();
            model.fitted = std::move(knn);
            break;
        }
        case Kind::NaiveBayes: {
            NbModel nb;
            nb.prior1 = r.f64();
            nb.mean0 = r.vec_f64();
            nb.var0 = r.vec_f64();
            nb.mean1 = r.vec_f64();
            nb.var1 = r.vec_f64();
            model.fitted = std::move(nb);
            break;
        }
        case Kind::LogisticRegression:
        case Kind::LinearSvm: {
            LinearModel linear;
            linear.weights = r.vec_f64();
            linear.bias = r.f64();
            linear.hinge = r.u8() != 0;
            model.fitted = std::move(linear);
            break;
        }
        case Kind::Ann:
        case Kind::Lstm:
        case Kind::Bilstm:
        case Kind::AnnLstm: {
            DeepModel deep;
            deep.net.input_width = r.u64();
            const std::uint64_t n_dense = r.u64();
            for (std::uint64_t i = 0; i < n_dense; ++i) {
                deep.net.dense_branch.push_back(read_dense(r));
            }
            if (r.u8() != 0) {
                LstmBranch branch{read_cell(r), std::nullopt};
                if (r.u8() != 0) branch.backward = read_cell(r);
                deep.net.recurrent = std::move(branch);
            }
            const std::uint64_t n_head = r.u64();
            for (std::uint64_t i = 0; i < n_head; ++i) deep.net.head.push_back(read_dense(r));
            deep.loss_curve = r.vec_f64();
            deep.net.validate();
            model.fitted = std::move(deep);
            break;
        }
        default:
            throw FormatError("unknown model kind tag in file");
    }
    if (!r.done()) throw FormatError("trailing bytes in model file");
    return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
    if (!out) throw InputError("short write to " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace phishguard::models
