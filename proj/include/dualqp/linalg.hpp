#pragma once

// Dense vector/matrix kernels and spectral estimates. Every matrix-vector
// product in the solver goes through mat_vec / mat_vec_into /
// mat_t_vec_into so that the per-thread profile below sees all of them.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualqp {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> diag);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  DenseMatrix transposed() const;
  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Box [lb, ub] with extended-real bounds.
struct Box {
  Vector lb;
  Vector ub;

  std::size_t size() const { return lb.size(); }
  bool bounded() const;
  bool contains(std::span<const double> v) const;
  Vector center() const;
};

Box make_box(Vector lb, Vector ub);

// Per-thread accounting of dense products; off unless a
// ScopedMatVecProfile is alive on the calling thread.
struct MatVecProfile {
  std::uint64_t calls = 0;
  std::uint64_t flops = 0;
  std::uint64_t nanoseconds = 0;
};

class ScopedMatVecProfile {
 public:
  ScopedMatVecProfile();
  ~ScopedMatVecProfile();
  ScopedMatVecProfile(const ScopedMatVecProfile&) = delete;
  ScopedMatVecProfile& operator=(const ScopedMatVecProfile&) = delete;

  MatVecProfile snapshot() const;

 private:
  bool previously_enabled_;
  MatVecProfile saved_;
};

Vector mat_vec(const DenseMatrix& m, std::span<const double> v);
void mat_vec_into(const DenseMatrix& m, std::span<const double> v, std::span<double> out);
/// out = m^T v
void mat_t_vec_into(const DenseMatrix& m, std::span<const double> v, std::span<double> out);

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b);
/// a^T a
DenseMatrix gram(const DenseMatrix& a);

struct EigExtremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Extreme eigenvalues of (m + m^T)/2 via Householder tridiagonalization and
/// Sturm-sequence bisection.
EigExtremes symmetric_eig_extremes(const DenseMatrix& m);

/// As above, but rejects matrices that are not positive definite.
EigExtremes eig_extremes_spd(const DenseMatrix& q);

double spectral_norm(const DenseMatrix& m);
double frobenius_norm(const DenseMatrix& m);

Vector box_project(std::span<const double> v, const Box& box);
void box_project_inplace(std::span<double> v, const Box& box);
Vector nonneg_project(std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double dist2(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
bool all_finite(std::span<const double> v);

}  // namespace dualqp
