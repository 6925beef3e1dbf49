#include "phishguard/matrix.hpp"

#include <cmath>
#include <sstream>

namespace phishguard {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix value count " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str());
    }
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Matrix::shape_str() const {
    std::ostringstream os;
    os << "(" << rows_ << "x" << cols_ << ")";
    return os.str();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul shape mismatch: " + a.shape_str() + " * " + b.shape_str());
    }
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Matrix c(n, m, 0.0);
    // ikj order: the inner loop is a saxpy over a row of b, vectorizes well.
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
    for (std::size_t i = 0; i < n; ++i) {
        double* crow = cd + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ad[i * k + p];
            if (aip == 0.0) continue;
            const double* brow = bd + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
        }
    }
    return c;
}

void matmul_at_b_accum(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_at_b shape mismatch: " + a.shape_str() + "^T * " + b.shape_str());
    }
    if (c.rows() != a.cols() || c.cols() != b.cols()) {
        throw ShapeError("matmul_at_b output shape mismatch: " + c.shape_str());
    }
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
    for (std::size_t r = 0; r < n; ++r) {
        const double* arow = ad + r * k;
        const double* brow = bd + r * m;
        for (std::size_t i = 0; i < k; ++i) {
            const double ari = arow[i];
            if (ari == 0.0) continue;
            double* crow = cd + i * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += ari * brow[j];
        }
    }
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
    return t;
}

Matrix add_row_broadcast(const Matrix& z, const Matrix& bias) {
    if (bias.rows() != 1 || bias.cols() != z.cols()) {
        throw ShapeError("bias shape " + bias.shape_str() + " cannot broadcast over " +
                         z.shape_str());
    }
    Matrix out = z;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bias(0, c);
    return out;
}

static void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + " shape mismatch: " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

Matrix col_sums(const Matrix& m) {
    Matrix out(1, m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(0, c) += m(r, c);
    return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("hconcat row mismatch: " + a.shape_str() + " vs " + b.shape_str());
    }
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
    }
    return out;
}

Matrix col_slice(const Matrix& m, std::size_t begin, std::size_t end) {
    if (begin > end || end > m.cols()) {
        throw ShapeError("col_slice [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + m.shape_str());
    }
    Matrix out(m.rows(), end - begin);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = m(r, c);
    return out;
}

Matrix row_slice(const Matrix& m, std::size_t begin, std::size_t end) {
    if (begin > end || end > m.rows()) {
        throw ShapeError("row_slice [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + m.shape_str());
    }
    Matrix out(end - begin, m.cols());
    for (std::size_t r = begin; r < end; ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r - begin, c) = m(r, c);
    return out;
}

Matrix map(const Matrix& m, double (*fn)(double)) {
    Matrix out = m;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = fn(out.data()[i]);
    return out;
}

// ---- SeededRng -------------------------------------------------------------

static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

static inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

std::uint64_t SeededRng::next_u64() {
    // xoshiro256**
    const std::uint64_t result = rotl64(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl64(s_[3], 45);
    return result;
}

double SeededRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    if (lo > hi) throw ParamError("uniform: lo > hi");
    return lo + (hi - lo) * next_double();
}

double SeededRng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
    if (n == 0) throw ParamError("next_below: n must be positive");
    // Rejection sampling for an unbiased draw.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
}

Matrix random_init(std::size_t rows, std::size_t cols, InitScheme scheme, SeededRng& rng,
                   double lo, double hi) {
    if (rows < 1 || cols < 1) throw ParamError("random_init: shape must be at least 1x1");
    double a = lo, b = hi;
    if (scheme == InitScheme::ScaledByFanIn) {
        const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        a = -bound;
        b = bound;
    } else if (lo > hi) {
        throw ParamError("random_init: lo > hi");
    }
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.uniform(a, b);
    return out;
}

void shuffle_indices(std::vector<std::size_t>& idx, SeededRng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace phishguard
