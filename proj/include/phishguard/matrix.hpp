#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "phishguard/error.hpp"

namespace phishguard {

// Dense row-major matrix of doubles. One sample per row throughout the
// codebase. Matrices are plain values; copying copies the buffer.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return at(r, c); }
    double operator()(std::size_t r, std::size_t c) const { return at(r, c); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const;

    std::string shape_str() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
// c += a^T * b without materializing the transpose.
void matmul_at_b_accum(const Matrix& a, const Matrix& b, Matrix& c);
Matrix transpose(const Matrix& m);
Matrix add_row_broadcast(const Matrix& z, const Matrix& bias);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
Matrix col_sums(const Matrix& m);               // 1 x cols
Matrix hconcat(const Matrix& a, const Matrix& b);
Matrix col_slice(const Matrix& m, std::size_t begin, std::size_t end);
Matrix row_slice(const Matrix& m, std::size_t begin, std::size_t end);
Matrix map(const Matrix& m, double (*fn)(double));

// Deterministic generator: xoshiro256** seeded through splitmix64. Fixed
// choice so identical seeds replay identical streams on every platform.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double next_double();
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller (two uniforms per pair, cached).
    double normal();
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

enum class InitScheme { Uniform, ScaledByFanIn };

// ScaledByFanIn draws uniform in +-sqrt(6 / (rows + cols)); Uniform draws in
// [lo, hi].
Matrix random_init(std::size_t rows, std::size_t cols, InitScheme scheme,
                   SeededRng& rng, double lo = 0.0, double hi = 0.0);

void shuffle_indices(std::vector<std::size_t>& idx, SeededRng& rng);

}  // namespace phishguard
