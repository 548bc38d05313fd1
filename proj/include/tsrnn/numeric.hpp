#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tsrnn {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const double& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double value);
  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throws ShapeError naming both shapes when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

double sigmoid(double x);

// CDF of Student's t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

// Inverse of student_t_cdf by bisection; p must lie in (0, 1).
double student_t_quantile(double p, double df);

// splitmix64 generator. The 64-bit state fully determines the stream, and
// the output sequence is identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n), unbiased (rejection sampling).
  std::size_t below(std::size_t n);
  // Standard normal via Box-Muller; one draw per call.
  double normal();

 private:
  std::uint64_t state_;
};

enum class SeedPurpose : std::uint64_t {
  Resample = 1,
  Init = 2,
  Training = 3,
  Permutation = 4,
  Residual = 5,
};

// Derives an independent sub-seed for (index, purpose) from a master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index, SeedPurpose purpose);

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n);

}  // namespace tsrnn
